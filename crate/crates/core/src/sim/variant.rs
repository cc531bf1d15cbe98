use serde::{Deserialize, Serialize};

use super::exact::{simulate_density, simulate_exact_capped, DEFAULT_DENSITY_CAP, DEFAULT_EXACT_CAP};
use super::noise::QubitNoise;
use super::trajectory::{sample_counts, DEFAULT_TRAJECTORY_CAP};
use crate::circuit::Distribution;
use crate::cutter::{Basis, InitState, SubcircuitSpec, SubcircuitVariant};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecMode {
    Exact,
    Sampled { shots: u64 },
}

/// Outcome distribution of one physical variant over the spec's output bits
/// (low) and one bit per upstream cut (high). Auxiliary bits are summed out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantResult {
    pub bases: Vec<Basis>,
    pub inits: Vec<InitState>,
    pub n_outputs: usize,
    pub probs: Vec<f64>,
}

impl VariantResult {
    pub fn n_cuts(&self) -> usize {
        self.bases.len()
    }

    /// Sum over cut outcomes with sign `(-1)^bit` for every cut whose label
    /// is not `I`. `labels` must agree with `bases` up to `I` versus `Z`.
    pub fn signed(&self, labels: &[Basis]) -> Vec<f64> {
        let mask = (1usize << self.n_outputs) - 1;
        let mut out = vec![0.0; 1 << self.n_outputs];
        for (i, &p) in self.probs.iter().enumerate() {
            let cuts = i >> self.n_outputs;
            let flips = labels
                .iter()
                .enumerate()
                .filter(|(k, l)| **l != Basis::I && (cuts >> k) & 1 == 1)
                .count();
            out[i & mask] += if flips % 2 == 0 { p } else { -p };
        }
        out
    }

    /// `(p+, p-)` for one cut: outcome mass by that cut's eigenvalue.
    pub fn split(&self, cut: usize) -> (Vec<f64>, Vec<f64>) {
        let mask = (1usize << self.n_outputs) - 1;
        let mut plus = vec![0.0; 1 << self.n_outputs];
        let mut minus = plus.clone();
        for (i, &p) in self.probs.iter().enumerate() {
            if (i >> (self.n_outputs + cut)) & 1 == 0 {
                plus[i & mask] += p;
            } else {
                minus[i & mask] += p;
            }
        }
        (plus, minus)
    }

    /// `p+ - p-` for one cut.
    pub fn eigen(&self, cut: usize) -> Vec<f64> {
        let (p, m) = self.split(cut);
        p.iter().zip(&m).map(|(a, b)| a - b).collect()
    }
}

/// Execute one variant of `spec` under `noise`.
pub fn run_variant(
    spec: &SubcircuitSpec,
    variant: &SubcircuitVariant,
    noise: &QubitNoise,
    mode: ExecMode,
    seed: u64,
) -> Result<VariantResult> {
    if variant.spec_id != spec.id {
        return Err(Error::Structural(format!(
            "variant of spec {} run against spec {}",
            variant.spec_id, spec.id
        )));
    }
    let n_out = spec.n_outputs();
    let base = spec.circuit.n_clbits;
    let keep: Vec<usize> = (0..n_out).chain(base..base + variant.bases.len()).collect();
    let full: Distribution = match mode {
        ExecMode::Exact if noise.is_noiseless() => simulate_exact_capped(&variant.circuit, DEFAULT_EXACT_CAP)?,
        ExecMode::Exact => {
            let mask = keep.iter().fold(0u64, |m, &b| m | (1 << b));
            simulate_density(&variant.circuit, noise, DEFAULT_DENSITY_CAP, mask)?
        }
        ExecMode::Sampled { shots } => {
            sample_counts(&variant.circuit, noise, shots, seed, DEFAULT_TRAJECTORY_CAP)?.to_distribution()
        }
    };
    Ok(VariantResult {
        bases: variant.bases.clone(),
        inits: variant.inits.clone(),
        n_outputs: n_out,
        probs: full.marginal(&keep).probs,
    })
}
