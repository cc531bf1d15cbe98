//! Monte-Carlo trajectory sampling with stochastic Pauli insertion.
//!
//! Shot `k` draws from its own ChaCha stream derived from `(seed, k)`, so
//! results do not depend on how shots are spread over threads. Every noise
//! site with nonzero strength consumes exactly two draws whether or not an
//! error fires; runs that differ only in error strengths therefore stay
//! aligned draw-for-draw.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::exact::deferred_measures;
use super::noise::{NoiseModel, QubitNoise};
use super::statevector::StateVector;
use crate::circuit::{Circuit, Distribution, Gate, GateKind};
use crate::error::{Error, Result};
use crate::par;

pub const DEFAULT_TRAJECTORY_CAP: usize = 26;

/// Outcome histogram keyed by the classical-register value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    pub n_bits: usize,
    pub shots: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl Counts {
    pub fn to_distribution(&self) -> Distribution {
        let mut probs = vec![0.0; 1 << self.n_bits];
        for (&k, &v) in &self.counts {
            probs[k as usize] = v as f64 / self.shots as f64;
        }
        Distribution {
            n_bits: self.n_bits,
            probs,
        }
    }
}

/// Mix a base seed with a path of indices (unit, variant, ...) into an
/// independent seed.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    path.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

pub(crate) fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

pub fn simulate_noisy(circuit: &Circuit, noise: &NoiseModel, shots: u64, seed: u64) -> Result<Counts> {
    let map = QubitNoise::uniform(noise, circuit.n_qubits);
    sample_counts(circuit, &map, shots, seed, DEFAULT_TRAJECTORY_CAP)
}

pub fn sample_counts(
    circuit: &Circuit,
    noise: &QubitNoise,
    shots: u64,
    seed: u64,
    cap: usize,
) -> Result<Counts> {
    circuit.validate()?;
    if shots == 0 {
        return Err(Error::InvalidParams("shots must be >= 1".into()));
    }
    if circuit.n_qubits > cap {
        return Err(Error::SimulationCap {
            needed: circuit.n_qubits,
            cap,
        });
    }
    if noise.p1.len() != circuit.n_qubits || noise.p2.len() != circuit.n_qubits {
        return Err(Error::Structural("noise map does not cover every qubit".into()));
    }
    let circuit = circuit.with_implicit_measurements();
    if circuit.n_clbits > 63 {
        return Err(Error::SimulationCap {
            needed: circuit.n_clbits,
            cap: 63,
        });
    }
    let deferred = deferred_measures(&circuit);
    let branching = circuit
        .gates
        .iter()
        .enumerate()
        .any(|(i, g)| (g.kind == GateKind::Measure && !deferred[i]) || g.kind == GateKind::Reset);

    let outcomes: Vec<u64> = if noise.is_noiseless() && !branching {
        // One evolution serves every shot; each shot spends one draw on the
        // final readout, exactly as the general path would.
        let (state, finals) = evolve_noiseless(&circuit, &deferred);
        let cdf = cumulative(&state.probabilities());
        par::map_range(shots as usize, |k| {
            let mut rng = shot_rng(seed, k as u64);
            readout(&cdf, &finals, 0, &mut rng)
        })
    } else {
        par::map_range(shots as usize, |k| {
            let mut rng = shot_rng(seed, k as u64);
            run_shot(&circuit, &deferred, noise, &mut rng)
        })
    };

    let mut counts = BTreeMap::new();
    for o in outcomes {
        *counts.entry(o).or_insert(0u64) += 1;
    }
    Ok(Counts {
        n_bits: circuit.n_clbits,
        shots,
        counts,
    })
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

fn readout(cdf: &[f64], finals: &[(usize, usize)], bits: u64, rng: &mut ChaCha8Rng) -> u64 {
    let total = *cdf.last().unwrap();
    let u: f64 = rng.gen::<f64>() * total;
    let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
    finals.iter().fold(bits, |b, &(q, c)| {
        if (idx >> q) & 1 == 1 {
            b | (1 << c)
        } else {
            b & !(1 << c)
        }
    })
}

fn evolve_noiseless(circuit: &Circuit, deferred: &[bool]) -> (StateVector, Vec<(usize, usize)>) {
    let mut sv = StateVector::zero(circuit.n_qubits);
    let mut finals = Vec::new();
    for (i, g) in circuit.gates.iter().enumerate() {
        if g.kind == GateKind::Measure {
            debug_assert!(deferred[i]);
            finals.push((g.qubits[0], g.clbit.unwrap()));
        } else if g.condition.is_none_or(|c| c.value == 0) {
            // no clbit is written before the final readout
            sv.apply_gate(g);
        }
    }
    (sv, finals)
}

fn apply_noise(sv: &mut StateVector, g: &Gate, noise: &QubitNoise, rng: &mut ChaCha8Rng) {
    if g.qubits.len() == 1 {
        let q = g.qubits[0];
        let p = noise.single(q);
        if p > 0.0 {
            let (u, k): (f64, usize) = (rng.gen(), rng.gen_range(1..4));
            if u < p {
                sv.apply_pauli(k, q);
            }
        }
    } else {
        let (a, b) = (g.qubits[0], g.qubits[1]);
        let mut two = |p: f64, sv: &mut StateVector| {
            if p > 0.0 {
                let (u, k): (f64, usize) = (rng.gen(), rng.gen_range(1..16));
                if u < p {
                    sv.apply_pauli(k / 4, a);
                    sv.apply_pauli(k % 4, b);
                }
            }
        };
        two(noise.pair(a, b), sv);
        if g.epr_link {
            two(noise.epr_failure, sv);
        }
    }
}

fn run_shot(circuit: &Circuit, deferred: &[bool], noise: &QubitNoise, rng: &mut ChaCha8Rng) -> u64 {
    let mut sv = StateVector::zero(circuit.n_qubits);
    let mut bits = 0u64;
    let mut finals = Vec::new();
    for (i, g) in circuit.gates.iter().enumerate() {
        if let Some(c) = g.condition {
            if ((bits >> c.bit) & 1) as u8 != c.value {
                continue;
            }
        }
        match g.kind {
            GateKind::Measure if deferred[i] => finals.push((g.qubits[0], g.clbit.unwrap())),
            GateKind::Measure | GateKind::Reset => {
                let q = g.qubits[0];
                let p1 = sv.prob_one(q);
                let outcome = rng.gen::<f64>() < p1;
                sv.collapse(q, outcome, if outcome { p1 } else { 1.0 - p1 });
                if g.kind == GateKind::Measure {
                    let c = g.clbit.unwrap();
                    bits = if outcome { bits | (1 << c) } else { bits & !(1 << c) };
                } else if outcome {
                    sv.flip_to_zero(q);
                }
            }
            _ => {
                sv.apply_gate(g);
                apply_noise(&mut sv, g, noise, rng);
            }
        }
    }
    if finals.is_empty() {
        return bits;
    }
    let cdf = cumulative(&sv.probabilities());
    readout(&cdf, &finals, bits, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::exact::simulate_exact;

    fn bell() -> Circuit {
        let mut c = Circuit::new("bell", 2, 0);
        c.h(0).cx(0, 1);
        c
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let n = NoiseModel::new(0.01, 0.05, 0.0).unwrap();
        let a = simulate_noisy(&bell(), &n, 2000, 9).unwrap();
        let b = simulate_noisy(&bell(), &n, 2000, 9).unwrap();
        assert_eq!(a, b);
        let c = simulate_noisy(&bell(), &n, 2000, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_converges_to_exact() {
        let counts = simulate_noisy(&bell(), &NoiseModel::noiseless(), 100_000, 1).unwrap();
        let tv = counts
            .to_distribution()
            .total_variation(&simulate_exact(&bell()).unwrap())
            .unwrap();
        assert!(tv <= 0.01, "tv {tv}");
    }

    #[test]
    fn zero_noise_fast_path_matches_general_path() {
        // a nonzero link failure with no tagged gates takes the general path
        // but spends no extra draws, so the histograms must be identical
        let fast = QubitNoise::uniform(&NoiseModel::noiseless(), 2);
        let mut slow = fast.clone();
        slow.epr_failure = 0.3;
        let a = sample_counts(&bell(), &fast, 500, 4, 26).unwrap();
        let b = sample_counts(&bell(), &slow, 500, 4, 26).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_qubit_full_depolarizing() {
        let mut c = Circuit::new("x", 1, 0);
        c.x(0);
        let n = NoiseModel::new(0.75, 0.0, 0.0).unwrap();
        let d = simulate_noisy(&c, &n, 100_000, 3).unwrap().to_distribution();
        assert!((d.probs[0] - 0.5).abs() <= 0.01 && (d.probs[1] - 0.5).abs() <= 0.01);
    }

    #[test]
    fn two_qubit_full_depolarizing() {
        let mut c = Circuit::new("cx", 2, 0);
        c.cx(0, 1);
        let n = NoiseModel::new(0.0, 15.0 / 16.0, 0.0).unwrap();
        let d = simulate_noisy(&c, &n, 100_000, 5).unwrap().to_distribution();
        assert!(d.probs.iter().all(|p| (p - 0.25).abs() <= 0.01), "{:?}", d.probs);
    }

    #[test]
    fn zero_shots_rejected() {
        assert!(simulate_noisy(&bell(), &NoiseModel::noiseless(), 0, 0).is_err());
    }
}
