//! Analytic simulation: branching pure states for noiseless circuits and
//! density matrices once noise is present.

use std::collections::BTreeMap;

use super::density::DensityMatrix;
use super::noise::QubitNoise;
use super::statevector::StateVector;
use crate::circuit::{Circuit, Distribution, Gate, GateKind};
use crate::error::{Error, Result};

pub const DEFAULT_EXACT_CAP: usize = 24;
pub const DEFAULT_DENSITY_CAP: usize = 12;

/// Branches lighter than this are dropped.
const PRUNE: f64 = 1e-16;

/// Measurements that can be read off the final state instead of branching:
/// unconditioned, and nothing later touches the qubit, reads the clbit, or
/// rewrites it.
pub(crate) fn deferred_measures(circuit: &Circuit) -> Vec<bool> {
    let n = circuit.gates.len();
    let mut out = vec![false; n];
    for (i, g) in circuit.gates.iter().enumerate() {
        if g.kind != GateKind::Measure {
            continue;
        }
        let (q, c) = (g.qubits[0], g.clbit.expect("measure has clbit"));
        out[i] = g.condition.is_none()
            && circuit.gates[i + 1..].iter().all(|h| {
            !h.acts_on(q) && h.condition.is_none_or(|k| k.bit != c) && h.clbit != Some(c)
        });
    }
    out
}

fn condition_holds(gate: &Gate, clbits: u64) -> bool {
    gate.condition
        .is_none_or(|c| ((clbits >> c.bit) & 1) as u8 == c.value)
}

fn set_bit(bits: u64, b: usize, v: bool) -> u64 {
    if v {
        bits | (1 << b)
    } else {
        bits & !(1 << b)
    }
}

fn check_clbits(circuit: &Circuit) -> Result<()> {
    if circuit.n_output_bits() > 30 {
        return Err(Error::SimulationCap {
            needed: circuit.n_output_bits(),
            cap: 30,
        });
    }
    Ok(())
}

/// Exact output distribution of a noiseless circuit over its classical bits
/// (every qubit, when the circuit measures nothing).
pub fn simulate_exact(circuit: &Circuit) -> Result<Distribution> {
    simulate_exact_capped(circuit, DEFAULT_EXACT_CAP)
}

pub fn simulate_exact_capped(circuit: &Circuit, cap: usize) -> Result<Distribution> {
    circuit.validate()?;
    if circuit.n_qubits > cap {
        return Err(Error::SimulationCap {
            needed: circuit.n_qubits,
            cap,
        });
    }
    let circuit = circuit.with_implicit_measurements();
    check_clbits(&circuit)?;
    let deferred = deferred_measures(&circuit);
    let mut branches: Vec<(f64, StateVector, u64)> =
        vec![(1.0, StateVector::zero(circuit.n_qubits), 0)];
    let mut finals: Vec<(usize, usize)> = Vec::new();

    for (i, g) in circuit.gates.iter().enumerate() {
        match g.kind {
            GateKind::Measure if deferred[i] => finals.push((g.qubits[0], g.clbit.unwrap())),
            GateKind::Measure | GateKind::Reset => {
                let q = g.qubits[0];
                let mut next = Vec::with_capacity(branches.len() * 2);
                for (w, sv, bits) in branches {
                    if !condition_holds(g, bits) {
                        next.push((w, sv, bits));
                        continue;
                    }
                    let p1 = sv.prob_one(q);
                    for (outcome, p) in [(false, 1.0 - p1), (true, p1)] {
                        if w * p <= PRUNE {
                            continue;
                        }
                        let mut s = sv.clone();
                        s.collapse(q, outcome, p);
                        let mut b = bits;
                        if g.kind == GateKind::Measure {
                            b = set_bit(b, g.clbit.unwrap(), outcome);
                        } else if outcome {
                            s.flip_to_zero(q);
                        }
                        next.push((w * p, s, b));
                    }
                }
                branches = next;
            }
            _ => {
                for (_, sv, bits) in branches.iter_mut() {
                    if condition_holds(g, *bits) {
                        sv.apply_gate(g);
                    }
                }
            }
        }
    }

    let mut probs = vec![0.0; 1 << circuit.n_clbits];
    for (w, sv, bits) in &branches {
        accumulate(&mut probs, *w, &sv.probabilities(), *bits, &finals);
    }
    Distribution::new(circuit.n_clbits, probs)
}

fn accumulate(out: &mut [f64], weight: f64, basis: &[f64], bits: u64, finals: &[(usize, usize)]) {
    for (idx, &p) in basis.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut b = bits;
        for &(q, c) in finals {
            b = set_bit(b, c, (idx >> q) & 1 == 1);
        }
        out[b as usize] += weight * p.max(0.0);
    }
}

/// Exact output distribution under per-qubit depolarizing noise and EPR link
/// failure, by density-matrix evolution. Branches that agree on every clbit
/// still read later are merged.
pub fn simulate_exact_noisy(circuit: &Circuit, noise: &QubitNoise, cap: usize) -> Result<Distribution> {
    simulate_density(circuit, noise, cap, u64::MAX)
}

/// As [`simulate_exact_noisy`], but clbits outside `keep` may be reported as
/// 0, which lets branches that differ only in them be merged.
pub(crate) fn simulate_density(
    circuit: &Circuit,
    noise: &QubitNoise,
    cap: usize,
    keep: u64,
) -> Result<Distribution> {
    circuit.validate()?;
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
    check_clbits(&circuit)?;
    let deferred = deferred_measures(&circuit);
    let mut branches: BTreeMap<u64, DensityMatrix> = BTreeMap::new();
    branches.insert(0, DensityMatrix::zero(circuit.n_qubits));
    let mut finals: Vec<(usize, usize)> = Vec::new();

    for (i, g) in circuit.gates.iter().enumerate() {
        match g.kind {
            GateKind::Measure if deferred[i] => finals.push((g.qubits[0], g.clbit.unwrap())),
            GateKind::Reset => {
                for (bits, rho) in branches.iter_mut() {
                    if condition_holds(g, *bits) {
                        rho.reset(g.qubits[0]);
                    }
                }
            }
            GateKind::Measure => {
                let (q, c) = (g.qubits[0], g.clbit.unwrap());
                let mut next: BTreeMap<u64, DensityMatrix> = BTreeMap::new();
                for (bits, rho) in branches {
                    if !condition_holds(g, bits) {
                        merge_into(&mut next, bits, rho);
                        continue;
                    }
                    for outcome in [false, true] {
                        let part = rho.project(q, outcome);
                        if part.trace() <= PRUNE {
                            continue;
                        }
                        merge_into(&mut next, set_bit(bits, c, outcome), part);
                    }
                }
                branches = next;
            }
            _ => {
                for (bits, rho) in branches.iter_mut() {
                    if !condition_holds(g, *bits) {
                        continue;
                    }
                    rho.apply_gate(g);
                    if g.qubits.len() == 1 {
                        rho.depolarize_1q(noise.single(g.qubits[0]), g.qubits[0]);
                    } else {
                        let (a, b) = (g.qubits[0], g.qubits[1]);
                        rho.depolarize_2q(noise.pair(a, b), a, b);
                        if g.epr_link {
                            rho.depolarize_2q(noise.epr_failure, a, b);
                        }
                    }
                }
            }
        }
        branches = forget_dead_bits(&circuit, i, keep, branches);
    }

    let mut probs = vec![0.0; 1 << circuit.n_clbits];
    for (bits, rho) in &branches {
        accumulate(&mut probs, 1.0, &rho.diagonal(), *bits, &finals);
    }
    Distribution::new(circuit.n_clbits, probs)
}

fn merge_into(map: &mut BTreeMap<u64, DensityMatrix>, bits: u64, rho: DensityMatrix) {
    match map.get_mut(&bits) {
        Some(existing) => existing.add(&rho),
        None => {
            map.insert(bits, rho);
        }
    }
}

/// Drop branch distinctions on clbits whose current value can no longer
/// matter: no later gate reads it before it is overwritten, and it is either
/// outside `keep` or overwritten later.
fn forget_dead_bits(
    circuit: &Circuit,
    at: usize,
    keep: u64,
    branches: BTreeMap<u64, DensityMatrix>,
) -> BTreeMap<u64, DensityMatrix> {
    if branches.len() < 2 {
        return branches;
    }
    let rest = &circuit.gates[at + 1..];
    let mut dead = 0u64;
    for c in 0..circuit.n_clbits {
        let mut read = false;
        let mut overwritten = false;
        for g in rest {
            if g.condition.is_some_and(|k| k.bit == c) {
                read = true;
                break;
            }
            if g.clbit == Some(c) {
                overwritten = true;
                break;
            }
        }
        if !read && (overwritten || (keep >> c) & 1 == 0) {
            dead |= 1 << c;
        }
    }
    if branches.keys().all(|b| b & dead == 0) {
        return branches;
    }
    let mut out = BTreeMap::new();
    for (bits, rho) in branches {
        merge_into(&mut out, bits & !dead, rho);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate_workload, WorkloadKind, WorkloadParams};

    #[test]
    fn hadamard_measure() {
        let mut c = Circuit::new("h", 1, 1);
        c.h(0).measure(0, 0);
        let d = simulate_exact(&c).unwrap();
        assert!((d.probs[0] - 0.5).abs() < 1e-15 && (d.probs[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ghz3() {
        let mut c = Circuit::new("ghz", 3, 0);
        c.h(0).cx(0, 1).cx(1, 2);
        let d = simulate_exact(&c).unwrap();
        assert!((d.prob("000") - 0.5).abs() < 1e-15);
        assert!((d.prob("111") - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bv_is_deterministic() {
        let c = generate_workload(WorkloadKind::Bv, 3, &WorkloadParams::Bv { secret: "101".into() }, 0)
            .unwrap();
        let d = simulate_exact(&c).unwrap();
        assert!((d.prob("101") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adder_sums() {
        for a in 0..4u64 {
            for b in 0..4u64 {
                let c = generate_workload(WorkloadKind::Adder, 6, &WorkloadParams::Adder { a, b }, 0)
                    .unwrap();
                let d = simulate_exact(&c).unwrap();
                // clbits 0..2 hold the sum register, clbit 2 the carry
                let want = (a + b) as usize;
                assert!((d.probs[want] - 1.0).abs() < 1e-10, "{a}+{b}");
            }
        }
        let c = generate_workload(WorkloadKind::Adder, 6, &WorkloadParams::Adder { a: 1, b: 1 }, 0).unwrap();
        let sum = simulate_exact(&c).unwrap().marginal(&[0, 1]);
        assert!((sum.prob("10") - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mid_circuit_measure_and_condition() {
        // teleport |1> from q0 to q2
        let mut c = Circuit::new("tp", 3, 3);
        c.x(0).h(1).cx(1, 2).cx(0, 1).h(0).measure(1, 0).measure(0, 1);
        c.push(Gate::new(GateKind::X, &[2]).conditioned(0, 1));
        c.push(Gate::new(GateKind::Z, &[2]).conditioned(1, 1));
        c.measure(2, 2);
        let d = simulate_exact(&c).unwrap().marginal(&[2]);
        assert!((d.probs[1] - 1.0).abs() < 1e-12);
        let n = QubitNoise::uniform(&Default::default(), 3);
        let dn = simulate_exact_noisy(&c, &n, 8).unwrap();
        let de = simulate_exact(&c).unwrap();
        assert!(dn.l1(&de).unwrap() < 1e-12);
    }

    #[test]
    fn reset_branches() {
        let mut c = Circuit::new("r", 1, 1);
        c.h(0).push(Gate::new(GateKind::Reset, &[0]));
        c.measure(0, 0);
        let d = simulate_exact(&c).unwrap();
        assert!((d.probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_enforced() {
        let c = Circuit::new("big", 5, 0);
        assert!(matches!(
            simulate_exact_capped(&c, 4),
            Err(Error::SimulationCap { needed: 5, cap: 4 })
        ));
    }
}
