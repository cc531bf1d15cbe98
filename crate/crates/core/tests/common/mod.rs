#![allow(dead_code)]

use std::f64::consts::PI;

use qcut::circuit::{Circuit, Gate, GateKind};
use qcut::config::SystemConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ONE_QUBIT: [GateKind; 7] = [
    GateKind::H,
    GateKind::X,
    GateKind::S,
    GateKind::T,
    GateKind::RX,
    GateKind::RY,
    GateKind::RZ,
];

/// Layered random circuit: each layer pairs up a random subset of qubits
/// with CX/CZ and hits the rest with single-qubit gates.
pub fn random_circuit(n: usize, depth: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(format!("rand_{n}_{depth}_{seed}"), n, 0);
    for _ in 0..depth {
        let mut qs: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            qs.swap(i, rng.gen_range(0..=i));
        }
        let pairs = rng.gen_range(1..=n / 2);
        for k in 0..pairs {
            let (a, b) = (qs[2 * k], qs[2 * k + 1]);
            let kind = if rng.gen_bool(0.5) { GateKind::CX } else { GateKind::CZ };
            c.push(Gate::new(kind, &[a, b]));
        }
        for &q in &qs[2 * pairs..] {
            let kind = ONE_QUBIT[rng.gen_range(0..ONE_QUBIT.len())];
            if kind.n_params() == 1 {
                c.rot(kind, q, rng.gen_range(0.0..2.0 * PI));
            } else {
                c.push(Gate::new(kind, &[q]));
            }
        }
    }
    c
}

pub fn ghz(n: usize) -> Circuit {
    let mut c = Circuit::new(format!("ghz{n}"), n, 0);
    c.h(0);
    for q in 0..n - 1 {
        c.cx(q, q + 1);
    }
    c
}

pub fn bell() -> Circuit {
    ghz(2)
}

pub fn ideal(n: usize, qubits: usize, budget: usize) -> SystemConfig {
    let mut s = SystemConfig::uniform(n, qubits, 0.0, 0.0, budget, 1.0);
    s.reserve = 0;
    s
}

/// Random circuit whose qubits are busy in stages: stage `s` works on a
/// contiguous block that shares its first qubit with the previous block, so
/// one wire cut per stage boundary separates it. Single-qubit gates land
/// anywhere.
pub fn staged_circuit(n: usize, stages: usize, depth: usize, seed: u64) -> Circuit {
    assert!(stages >= 1 && n > stages);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(format!("staged_{n}_{stages}_{seed}"), n, 0);
    // block boundaries: stage s covers qubits bounds[s]..=bounds[s + 1]
    let mut bounds = vec![0usize];
    for s in 1..stages {
        let lo = bounds[s - 1] + 1;
        let hi = n - 1 - (stages - s);
        bounds.push(rng.gen_range(lo..=hi.max(lo)));
    }
    bounds.push(n - 1);
    let per_stage = (depth / stages).max(1);
    for s in 0..stages {
        let block: Vec<usize> = (bounds[s]..=bounds[s + 1]).collect();
        for layer in 0..per_stage {
            for &q in &block {
                if rng.gen_bool(0.4) {
                    let kind = ONE_QUBIT[rng.gen_range(0..ONE_QUBIT.len())];
                    if kind.n_params() == 1 {
                        c.rot(kind, q, rng.gen_range(0.0..2.0 * PI));
                    } else {
                        c.push(Gate::new(kind, &[q]));
                    }
                }
            }
            // the handoff qubit must touch both stages
            let a = if layer == 0 && s > 0 { block[0] } else { block[rng.gen_range(0..block.len())] };
            let mut b = block[rng.gen_range(0..block.len())];
            if b == a {
                b = if a == block[block.len() - 1] { block[0] } else { a + 1 };
            }
            let kind = if rng.gen_bool(0.5) { GateKind::CX } else { GateKind::CZ };
            c.push(Gate::new(kind, &[a, b]));
        }
    }
    c
}
