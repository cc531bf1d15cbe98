//! Sampling overhead, EPR-adjusted overhead, multi-node expenditure and
//! distribution fidelity.

use serde::{Deserialize, Serialize};

use crate::circuit::Distribution;
use crate::error::{Error, Result};

/// One executable entity as the cost model sees it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEntity {
    /// Qubits counted in the `2^sq` dimension factor.
    pub sq: usize,
    /// Error rate on the assigned worker.
    pub eps: f64,
    /// Total shots across the entity's variants.
    pub n_shots: f64,
    /// Whether the entity joins two subcircuits over EPR links.
    pub merged: bool,
}

/// `shots_base * 4^roles`: every cut endpoint multiplies the variant count by 4.
pub fn shots_for_roles(shots_base: u64, roles: usize) -> f64 {
    shots_base as f64 * 4f64.powi(roles as i32)
}

/// `1 / (1 - 2 eps)^2`.
// written negated so NaN is rejected too
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn noise_factor(eps: f64) -> Result<f64> {
    if !(eps < 0.5) {
        return Err(Error::DivergentOverhead(eps));
    }
    let d = 1.0 - 2.0 * eps;
    Ok(1.0 / (d * d))
}

/// Product over entities of `noise_factor * n_shots`, ignoring merges.
pub fn sampling_overhead(entities: &[CostEntity]) -> Result<f64> {
    entities
        .iter()
        .try_fold(1.0, |acc, e| Ok(acc * noise_factor(e.eps)? * e.n_shots))
}

/// An entity's term with EPR links: merged entities scale by `1 - SR`.
pub fn entity_term(e: &CostEntity, success_rate: f64) -> Result<f64> {
    let shots = if e.merged {
        // written as a difference so that e.g. 1000 and 0.9 give exactly 100
        e.n_shots - e.n_shots * success_rate
    } else {
        e.n_shots
    };
    Ok(noise_factor(e.eps)? * shots)
}

/// Unmerged and merged groups combined as one product.
pub fn epr_overhead(entities: &[CostEntity], success_rate: f64) -> Result<f64> {
    entities
        .iter()
        .try_fold(1.0, |acc, e| Ok(acc * entity_term(e, success_rate)?))
}

/// The two groups added rather than multiplied; an empty group contributes 0.
pub fn epr_overhead_additive(entities: &[CostEntity], success_rate: f64) -> Result<f64> {
    let mut groups = [None::<f64>, None::<f64>];
    for e in entities {
        let slot = &mut groups[e.merged as usize];
        *slot = Some(slot.unwrap_or(1.0) * entity_term(e, success_rate)?);
    }
    Ok(groups.iter().map(|g| g.unwrap_or(0.0)).sum())
}

/// `4^(k - 2e) * prod(2^sq * term)`, where `k` already counts 2 per cut.
pub fn seme(k: usize, e: usize, entities: &[CostEntity], success_rate: f64) -> Result<f64> {
    let mut v = 4f64.powi(k as i32 - 2 * e as i32);
    for ent in entities {
        v *= 2f64.powi(ent.sq as i32) * entity_term(ent, success_rate)?;
    }
    Ok(v)
}

/// Natural log of [`seme`], for comparisons that would overflow.
pub fn log_seme(k: usize, e: usize, entities: &[CostEntity], success_rate: f64) -> Result<f64> {
    let mut v = (k as f64 - 2.0 * e as f64) * 4f64.ln();
    for ent in entities {
        v += ent.sq as f64 * 2f64.ln() + entity_term(ent, success_rate)?.ln();
    }
    Ok(v)
}

/// Every intermediate of the cost evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub entities: Vec<CostEntity>,
    pub terms: Vec<f64>,
    pub overhead: f64,
    pub epr_overhead: f64,
    pub epr_overhead_additive: f64,
    pub k: usize,
    pub e: usize,
    pub success_rate: f64,
    pub seme: f64,
    pub log_seme: f64,
    /// Filled in by the caller once the unmerged reference is known.
    pub seme_pct_of_baseline: Option<f64>,
}

impl CostReport {
    pub fn evaluate(k: usize, e: usize, entities: Vec<CostEntity>, success_rate: f64) -> Result<Self> {
        let terms = entities
            .iter()
            .map(|x| entity_term(x, success_rate))
            .collect::<Result<Vec<_>>>()?;
        Ok(CostReport {
            overhead: sampling_overhead(&entities)?,
            epr_overhead: epr_overhead(&entities, success_rate)?,
            epr_overhead_additive: epr_overhead_additive(&entities, success_rate)?,
            seme: seme(k, e, &entities, success_rate)?,
            log_seme: log_seme(k, e, &entities, success_rate)?,
            terms,
            entities,
            k,
            e,
            success_rate,
            seme_pct_of_baseline: None,
        })
    }

    /// Percentage relative to `baseline`, computed in log space.
    pub fn with_baseline(mut self, baseline: &CostReport) -> Self {
        self.seme_pct_of_baseline = Some(100.0 * (self.log_seme - baseline.log_seme).exp());
        self
    }
}

/// Hellinger fidelity `(sum sqrt(p q))^2`.
pub fn fidelity(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.n_bits != q.n_bits {
        return Err(Error::ShapeMismatch(p.n_bits, q.n_bits));
    }
    let bc: f64 = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a.max(0.0) * b.max(0.0)).sqrt())
        .sum();
    Ok((bc * bc).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(sq: usize, eps: f64, n_shots: f64) -> CostEntity {
        CostEntity {
            sq,
            eps,
            n_shots,
            merged: false,
        }
    }

    #[test]
    fn overhead_fixtures() {
        assert_eq!(sampling_overhead(&[single(1, 0.0, 1000.0)]).unwrap(), 1000.0);
        assert_eq!(sampling_overhead(&[single(1, 0.25, 1000.0)]).unwrap(), 4000.0);
        assert_eq!(
            sampling_overhead(&[single(1, 0.0, 1000.0), single(1, 0.0, 1000.0)]).unwrap(),
            1e6
        );
        assert!(matches!(noise_factor(0.5), Err(Error::DivergentOverhead(_))));
    }

    #[test]
    fn epr_fixtures() {
        let merged = CostEntity {
            merged: true,
            ..single(7, 0.0, 1000.0)
        };
        assert_eq!(epr_overhead(&[merged], 0.9).unwrap(), 100.0);
        assert_eq!(epr_overhead(&[single(1, 0.0, 1000.0), merged], 0.9).unwrap(), 1e5);
        assert_eq!(epr_overhead_additive(&[single(1, 0.0, 1000.0), merged], 0.9).unwrap(), 1100.0);
        let plain = [single(3, 0.1, 1000.0), single(4, 0.0, 500.0)];
        assert_eq!(epr_overhead(&plain, 0.9).unwrap(), sampling_overhead(&plain).unwrap());
    }

    #[test]
    fn seme_fixtures() {
        let two = [single(3, 0.0, 1000.0), single(4, 0.0, 1000.0)];
        assert_eq!(seme(2, 0, &two, 0.9).unwrap(), 2.048e9);
        let merged = [CostEntity {
            merged: true,
            ..single(7, 0.0, 1000.0)
        }];
        assert_eq!(seme(2, 1, &merged, 0.9).unwrap(), 12800.0);
        assert_eq!(seme(0, 0, &[single(5, 0.0, 8192.0)], 1.0).unwrap(), 32.0 * 8192.0);
        let l = log_seme(2, 0, &two, 0.9).unwrap();
        assert!((l - 2.048e9f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_cases() {
        let a = Distribution::new(1, vec![0.5, 0.5]).unwrap();
        let b = Distribution::new(1, vec![1.0, 0.0]).unwrap();
        let c = Distribution::new(1, vec![0.0, 1.0]).unwrap();
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&b, &c).unwrap(), 0.0);
        assert!((fidelity(&a, &b).unwrap() - 0.5).abs() < 1e-15);
        let d = Distribution::new(2, vec![0.25; 4]).unwrap();
        assert!(matches!(fidelity(&a, &d), Err(Error::ShapeMismatch(1, 2))));
    }
}
