//! Density-matrix evolution used for analytic noisy evaluation.
//!
//! `rho[r][c]` is stored at index `(r << n) | c`, so the row register is an
//! upper block of qubits in a `2n`-qubit vector. A unitary `U` on qubit `q`
//! acts as `U` on bit `q + n` and `conj(U)` on bit `q`, which lets the
//! state-vector kernels do all the work.

use num_complex::Complex64;

use super::statevector::{conj, gate_matrix, pauli, StateVector};
use crate::circuit::{Gate, GateKind};

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n_qubits: usize,
    vec: StateVector,
}

impl DensityMatrix {
    pub fn zero(n_qubits: usize) -> Self {
        DensityMatrix {
            n_qubits,
            vec: StateVector::zero(2 * n_qubits),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.n_qubits;
        let a = self.vec.amps();
        (0..1usize << n).map(|i| a[(i << n) | i].re).collect()
    }

    fn apply_1q(&mut self, m: &[[Complex64; 2]; 2], q: usize) {
        self.vec.apply_1q(m, q + self.n_qubits);
        self.vec.apply_1q(&conj(m), q);
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        let n = self.n_qubits;
        match gate.kind {
            GateKind::CX => {
                let (c, t) = (gate.qubits[0], gate.qubits[1]);
                self.vec.apply_cx(c + n, t + n);
                self.vec.apply_cx(c, t);
            }
            GateKind::CZ => {
                let (a, b) = (gate.qubits[0], gate.qubits[1]);
                self.vec.apply_cz(a + n, b + n);
                self.vec.apply_cz(a, b);
            }
            GateKind::Measure | GateKind::Reset => {
                panic!("non-unitary {} passed to apply_gate", gate.kind.name())
            }
            k => self.apply_1q(&gate_matrix(k, &gate.params), gate.qubits[0]),
        }
    }

    fn axpy(&mut self, alpha: f64, other: &DensityMatrix) {
        for (a, b) in self.vec.amps_mut().iter_mut().zip(other.vec.amps()) {
            *a += b * alpha;
        }
    }

    /// Replace `rho` by `(1-w) rho + w (Tr_S rho) x I/2^|S|` over the qubits
    /// in `qs`. Uniform Pauli mixing over all `4^|S|` Paulis has exactly this
    /// form, so depolarizing needs no per-Pauli copies.
    fn twirl(&mut self, w: f64, qs: &[usize]) {
        let n = self.n_qubits;
        let masks: Vec<(usize, usize)> = qs.iter().map(|&q| (1usize << (q + n), 1usize << q)).collect();
        let all = masks.iter().fold(0, |m, &(r, c)| m | r | c);
        let k = qs.len();
        let dim = 1usize << k;
        let amps = self.vec.amps_mut();
        let spread = |sel: usize, rsel: usize| {
            masks.iter().enumerate().fold(0, |acc, (j, &(r, c))| {
                acc | if (rsel >> j) & 1 == 1 { r } else { 0 } | if (sel >> j) & 1 == 1 { c } else { 0 }
            })
        };
        for base in 0..amps.len() {
            if base & all != 0 {
                continue;
            }
            let mut diag = Complex64::new(0.0, 0.0);
            for x in 0..dim {
                diag += amps[base | spread(x, x)];
            }
            let avg = diag / dim as f64;
            for rsel in 0..dim {
                for csel in 0..dim {
                    let i = base | spread(csel, rsel);
                    let mixed = if rsel == csel { avg } else { Complex64::new(0.0, 0.0) };
                    amps[i] = amps[i] * (1.0 - w) + mixed * w;
                }
            }
        }
    }

    /// `(1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)` on qubit `q`.
    pub fn depolarize_1q(&mut self, p: f64, q: usize) {
        if p != 0.0 {
            self.twirl(4.0 * p / 3.0, &[q]);
        }
    }

    /// `(1-p) rho + p/15 sum_{(i,j) != (0,0)} (P_i x P_j) rho (P_i x P_j)`.
    pub fn depolarize_2q(&mut self, p: f64, a: usize, b: usize) {
        if p != 0.0 {
            self.twirl(16.0 * p / 15.0, &[a, b]);
        }
    }

    /// Unnormalized projection onto `q = outcome`; the trace of the result is
    /// that outcome's probability times the current trace.
    pub fn project(&self, q: usize, outcome: bool) -> DensityMatrix {
        let n = self.n_qubits;
        let (rb, cb) = (1usize << (q + n), 1usize << q);
        let mut out = self.clone();
        for (i, a) in out.vec.amps_mut().iter_mut().enumerate() {
            let keep = ((i & rb) != 0) == outcome && ((i & cb) != 0) == outcome;
            if !keep {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Reset qubit `q` to |0>: `P0 rho P0 + X P1 rho P1 X`.
    pub fn reset(&mut self, q: usize) {
        let mut one = self.project(q, true);
        one.apply_1q(&pauli(1), q);
        *self = self.project(q, false);
        self.axpy(1.0, &one);
    }

    pub fn add(&mut self, other: &DensityMatrix) {
        self.axpy(1.0, other);
    }
}
