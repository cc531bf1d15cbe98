use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Depolarizing strengths for one device plus the EPR link-failure
/// probability. Link failure is modeled as a two-qubit depolarizing channel
/// of strength `epr_failure` after every EPR-tagged gate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub epr_failure: f64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel::default()
    }

    pub fn new(p1: f64, p2: f64, epr_failure: f64) -> Result<Self> {
        for (name, v) in [("p1", p1), ("p2", p2), ("epr_failure", epr_failure)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(NoiseModel {
            p1,
            p2,
            epr_failure,
        })
    }
}

/// Per-qubit noise, for circuits whose qubits live on different devices.
/// A two-qubit gate spanning devices uses the larger of the two `p2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitNoise {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub epr_failure: f64,
}

impl QubitNoise {
    pub fn uniform(model: &NoiseModel, n_qubits: usize) -> Self {
        QubitNoise {
            p1: vec![model.p1; n_qubits],
            p2: vec![model.p2; n_qubits],
            epr_failure: model.epr_failure,
        }
    }

    /// Qubit `q` takes `models[side[q]]`; `epr_failure` comes from the caller.
    pub fn split(models: &[NoiseModel], side: &[usize], epr_failure: f64) -> Self {
        QubitNoise {
            p1: side.iter().map(|&s| models[s].p1).collect(),
            p2: side.iter().map(|&s| models[s].p2).collect(),
            epr_failure,
        }
    }

    pub fn single(&self, q: usize) -> f64 {
        self.p1[q]
    }

    pub fn pair(&self, a: usize, b: usize) -> f64 {
        self.p2[a].max(self.p2[b])
    }

    pub fn is_noiseless(&self) -> bool {
        self.epr_failure == 0.0
            && self.p1.iter().all(|&p| p == 0.0)
            && self.p2.iter().all(|&p| p == 0.0)
    }
}
