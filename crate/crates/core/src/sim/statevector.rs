use num_complex::Complex64;

use crate::circuit::{Gate, GateKind};
use crate::par;

pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Below this many amplitudes, kernels stay on the calling thread.
const PAR_THRESHOLD: usize = 1 << 14;

pub fn gate_matrix(kind: GateKind, params: &[f64]) -> Matrix2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::H => [[ONE * s, ONE * s], [ONE * s, -ONE * s]],
        GateKind::X => pauli(1),
        GateKind::Y => pauli(2),
        GateKind::Z => pauli(3),
        GateKind::S => [[ONE, ZERO], [ZERO, I]],
        GateKind::Sdg => [[ONE, ZERO], [ZERO, -I]],
        GateKind::T => [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]],
        GateKind::Tdg => [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)]],
        GateKind::RX => {
            let (sn, c) = (params[0] / 2.0).sin_cos();
            [[ONE * c, -I * sn], [-I * sn, ONE * c]]
        }
        GateKind::RY => {
            let (sn, c) = (params[0] / 2.0).sin_cos();
            [[ONE * c, -ONE * sn], [ONE * sn, ONE * c]]
        }
        GateKind::RZ => {
            let t = params[0] / 2.0;
            [
                [Complex64::from_polar(1.0, -t), ZERO],
                [ZERO, Complex64::from_polar(1.0, t)],
            ]
        }
        other => panic!("{} has no 2x2 matrix", other.name()),
    }
}

/// Pauli by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli(k: usize) -> Matrix2 {
    match k {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => unreachable!("pauli index {k}"),
    }
}

pub fn conj(m: &Matrix2) -> Matrix2 {
    [
        [m[0][0].conj(), m[0][1].conj()],
        [m[1][0].conj(), m[1][1].conj()],
    ]
}

/// Dense pure state. Amplitude index bit `q` is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        StateVector { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr().clamp(0.0, 1.0)).collect()
    }

    pub fn apply_1q(&mut self, m: &Matrix2, q: usize) {
        let stride = 1usize << q;
        let block = stride << 1;
        let kernel = |_: usize, chunk: &mut [Complex64]| {
            for base in (0..chunk.len()).step_by(block) {
                for i in base..base + stride {
                    let a0 = chunk[i];
                    let a1 = chunk[i + stride];
                    chunk[i] = m[0][0] * a0 + m[0][1] * a1;
                    chunk[i + stride] = m[1][0] * a0 + m[1][1] * a1;
                }
            }
        };
        if self.amps.len() >= PAR_THRESHOLD {
            let chunk = block.max(PAR_THRESHOLD / 4);
            par::for_each_chunk_mut(&mut self.amps, chunk, kernel);
        } else {
            let len = self.amps.len();
            kernel(0, &mut self.amps[..len]);
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let (c, t) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// Apply the unitary part of `gate`. Measurement and reset are handled
    /// by the callers that track classical state.
    pub fn apply_gate(&mut self, gate: &Gate) {
        match gate.kind {
            GateKind::CX => self.apply_cx(gate.qubits[0], gate.qubits[1]),
            GateKind::CZ => self.apply_cz(gate.qubits[0], gate.qubits[1]),
            GateKind::Measure | GateKind::Reset => {
                panic!("non-unitary {} passed to apply_gate", gate.kind.name())
            }
            k => self.apply_1q(&gate_matrix(k, &gate.params), gate.qubits[0]),
        }
    }

    pub fn apply_pauli(&mut self, k: usize, q: usize) {
        if k != 0 {
            self.apply_1q(&pauli(k), q);
        }
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// Project qubit `q` onto `outcome` and renormalize given that outcome's
    /// probability.
    pub fn collapse(&mut self, q: usize, outcome: bool, prob: f64) {
        let bit = 1usize << q;
        let scale = 1.0 / prob.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & bit) != 0) == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
    }

    /// Move the amplitude of `q = 1` onto `q = 0` after a collapse to 1.
    pub fn flip_to_zero(&mut self, q: usize) {
        self.apply_1q(&pauli(1), q);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates_are_unitary() {
        for k in [
            GateKind::H,
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::S,
            GateKind::Sdg,
            GateKind::T,
            GateKind::Tdg,
            GateKind::RX,
            GateKind::RY,
            GateKind::RZ,
        ] {
            let m = gate_matrix(k, &[0.37]);
            for r in 0..2 {
                for c in 0..2 {
                    let dot: Complex64 = (0..2).map(|j| m[r][j] * m[c][j].conj()).sum();
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!((dot - want).norm() < 1e-14, "{k:?}");
                }
            }
        }
    }

    #[test]
    fn bell_state() {
        let mut sv = StateVector::zero(2);
        sv.apply_1q(&gate_matrix(GateKind::H, &[]), 0);
        sv.apply_cx(0, 1);
        let p = sv.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[3] - 0.5).abs() < 1e-15);
        assert!((sv.prob_one(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn large_register_uses_chunked_kernel() {
        let n = 15;
        let mut sv = StateVector::zero(n);
        for q in 0..n {
            sv.apply_1q(&gate_matrix(GateKind::H, &[]), q);
        }
        let expected = 1.0 / (1usize << n) as f64;
        assert!(sv.probabilities().iter().all(|p| (p - expected).abs() < 1e-15));
        assert!((sv.norm_sqr() - 1.0).abs() < 1e-10);
    }
}
