//! Circuit intermediate representation.
//!
//! Qubit and classical-bit indices are plain `usize`. Bit `i` of a
//! distribution index is classical bit (or qubit) `i`; textual bitstrings
//! put bit `n-1` on the left.

mod json;
mod qasm;
pub mod workloads;

pub use json::{from_json, to_json};
pub use qasm::{parse_qasm, to_qasm};
pub use workloads::{generate_workload, WorkloadKind, WorkloadParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    RX,
    RY,
    RZ,
    CX,
    CZ,
    Measure,
    Reset,
}

impl GateKind {
    pub const ALL: [GateKind; 15] = [
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
        GateKind::CX,
        GateKind::CZ,
        GateKind::Measure,
        GateKind::Reset,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ => 2,
            _ => 1,
        }
    }

    pub fn n_params(self) -> usize {
        match self {
            GateKind::RX | GateKind::RY | GateKind::RZ => 1,
            _ => 0,
        }
    }

    pub fn is_unitary(self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Reset)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::T => "T",
            GateKind::Tdg => "TDG",
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::CX => "CX",
            GateKind::CZ => "CZ",
            GateKind::Measure => "MEASURE",
            GateKind::Reset => "RESET",
        }
    }

    pub fn from_name(name: &str) -> Option<GateKind> {
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(name))
    }
}

/// Single-bit classical condition: the gate fires only when `bit == value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub bit: usize,
    pub value: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
    pub clbit: Option<usize>,
    pub condition: Option<Condition>,
    /// Marks the entangling gate of an EPR-pair preparation. The noisy
    /// simulator applies the link-failure channel after it.
    pub epr_link: bool,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize]) -> Self {
        Gate {
            kind,
            qubits: qubits.to_vec(),
            params: Vec::new(),
            clbit: None,
            condition: None,
            epr_link: false,
        }
    }

    pub fn rotation(kind: GateKind, qubit: usize, angle: f64) -> Self {
        Gate {
            params: vec![angle],
            ..Gate::new(kind, &[qubit])
        }
    }

    pub fn measure(qubit: usize, clbit: usize) -> Self {
        Gate {
            clbit: Some(clbit),
            ..Gate::new(GateKind::Measure, &[qubit])
        }
    }

    pub fn conditioned(mut self, bit: usize, value: u8) -> Self {
        self.condition = Some(Condition { bit, value });
        self
    }

    pub fn epr(mut self) -> Self {
        self.epr_link = true;
        self
    }

    pub fn acts_on(&self, qubit: usize) -> bool {
        self.qubits.contains(&qubit)
    }

    fn check(&self, n_qubits: usize, n_clbits: usize, at: usize) -> Result<()> {
        let ctx = |m: String| Error::InvalidCircuit(format!("gate {at} ({}): {m}", self.kind.name()));
        if self.qubits.len() != self.kind.arity() {
            return Err(ctx(format!(
                "expects {} qubit(s), got {}",
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        if self.params.len() != self.kind.n_params() {
            return Err(ctx(format!(
                "expects {} parameter(s), got {}",
                self.kind.n_params(),
                self.params.len()
            )));
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(ctx("non-finite angle".into()));
        }
        for &q in &self.qubits {
            if q >= n_qubits {
                return Err(Error::IndexOutOfRange(format!(
                    "gate {at}: qubit {q} >= {n_qubits}"
                )));
            }
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(ctx("repeated qubit".into()));
        }
        match (self.kind, self.clbit) {
            (GateKind::Measure, Some(c)) if c >= n_clbits => {
                return Err(Error::IndexOutOfRange(format!(
                    "gate {at}: clbit {c} >= {n_clbits}"
                )))
            }
            (GateKind::Measure, None) => return Err(ctx("measure without clbit".into())),
            (k, Some(_)) if k != GateKind::Measure => {
                return Err(ctx("only MEASURE writes a clbit".into()))
            }
            _ => {}
        }
        if let Some(c) = self.condition {
            if c.bit >= n_clbits {
                return Err(Error::IndexOutOfRange(format!(
                    "gate {at}: condition bit {} >= {n_clbits}",
                    c.bit
                )));
            }
            if c.value > 1 {
                return Err(ctx("condition value must be 0 or 1".into()));
            }
        }
        if self.epr_link && self.kind.arity() != 2 {
            return Err(ctx("epr_link tag requires a two-qubit gate".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub name: String,
    pub n_qubits: usize,
    pub n_clbits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(name: impl Into<String>, n_qubits: usize, n_clbits: usize) -> Self {
        Circuit {
            name: name.into(),
            n_qubits,
            n_clbits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.push(Gate::new(GateKind::H, &[q]))
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.push(Gate::new(GateKind::X, &[q]))
    }

    pub fn cx(&mut self, c: usize, t: usize) -> &mut Self {
        self.push(Gate::new(GateKind::CX, &[c, t]))
    }

    pub fn cz(&mut self, a: usize, b: usize) -> &mut Self {
        self.push(Gate::new(GateKind::CZ, &[a, b]))
    }

    pub fn rot(&mut self, kind: GateKind, q: usize, angle: f64) -> &mut Self {
        self.push(Gate::rotation(kind, q, angle))
    }

    pub fn measure(&mut self, q: usize, c: usize) -> &mut Self {
        self.push(Gate::measure(q, c))
    }

    /// Check every structural invariant of the IR.
    pub fn validate(&self) -> Result<()> {
        let mut written = vec![false; self.n_clbits];
        for (i, g) in self.gates.iter().enumerate() {
            g.check(self.n_qubits, self.n_clbits, i)?;
            if let Some(c) = g.condition {
                if !written[c.bit] {
                    return Err(Error::InvalidCircuit(format!(
                        "gate {i} is conditioned on clbit {} before any measurement writes it",
                        c.bit
                    )));
                }
            }
            if let Some(c) = g.clbit {
                written[c] = true;
            }
        }
        Ok(())
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.iter().any(|g| g.kind == GateKind::Measure)
    }

    /// The circuit whose classical register defines its output: unchanged
    /// when it measures anything, otherwise every qubit `i` is measured into
    /// a fresh clbit `i` at the end.
    pub fn with_implicit_measurements(&self) -> Circuit {
        if self.has_measurements() {
            return self.clone();
        }
        let mut c = self.clone();
        c.n_clbits = self.n_qubits;
        for q in 0..self.n_qubits {
            c.measure(q, q);
        }
        c
    }

    /// Number of output bits of [`Circuit::with_implicit_measurements`].
    pub fn n_output_bits(&self) -> usize {
        if self.has_measurements() {
            self.n_clbits
        } else {
            self.n_qubits
        }
    }

    pub fn census(&self) -> Census {
        gate_census(self)
    }
}

/// Single- and two-qubit unitary gate counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub p: usize,
    pub q: usize,
}

impl Census {
    /// Greedy scheduling weight: two-qubit gates count double.
    pub fn weight(&self) -> usize {
        2 * self.q + self.p
    }
}

pub fn gate_census(circuit: &Circuit) -> Census {
    census_of(&circuit.gates)
}

pub(crate) fn census_of(gates: &[Gate]) -> Census {
    gates
        .iter()
        .filter(|g| g.kind.is_unitary())
        .fold(Census::default(), |mut c, g| {
            if g.kind.arity() == 2 {
                c.q += 1;
            } else {
                c.p += 1;
            }
            c
        })
}

/// Probability vector over `n_bits` measured bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub n_bits: usize,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn new(n_bits: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1usize << n_bits {
            return Err(Error::Structural(format!(
                "distribution over {n_bits} bits needs {} entries, got {}",
                1usize << n_bits,
                probs.len()
            )));
        }
        Ok(Distribution { n_bits, probs })
    }

    pub fn point(n_bits: usize, index: usize) -> Self {
        let mut probs = vec![0.0; 1 << n_bits];
        probs[index] = 1.0;
        Distribution { n_bits, probs }
    }

    /// Build from `(bitstring, probability)` pairs; unspecified entries are 0.
    pub fn from_bitstrings(n_bits: usize, entries: &[(&str, f64)]) -> Result<Self> {
        let mut probs = vec![0.0; 1 << n_bits];
        for (s, p) in entries {
            probs[parse_bitstring(s, n_bits)?] += p;
        }
        Ok(Distribution { n_bits, probs })
    }

    pub fn prob(&self, bits: &str) -> f64 {
        parse_bitstring(bits, self.n_bits)
            .map(|i| self.probs[i])
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn l1(&self, other: &Distribution) -> Result<f64> {
        if self.n_bits != other.n_bits {
            return Err(Error::ShapeMismatch(self.n_bits, other.n_bits));
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    pub fn total_variation(&self, other: &Distribution) -> Result<f64> {
        Ok(0.5 * self.l1(other)?)
    }

    /// Marginal over the listed bits; bit `k` of the result is `bits[k]`.
    pub fn marginal(&self, bits: &[usize]) -> Distribution {
        let mut probs = vec![0.0; 1 << bits.len()];
        for (i, p) in self.probs.iter().enumerate() {
            probs[gather_bits(i, bits)] += p;
        }
        Distribution {
            n_bits: bits.len(),
            probs,
        }
    }

    /// The `k` most probable outcomes, ties broken by lower index.
    pub fn top_k(&self, k: usize) -> Vec<(String, f64)> {
        let mut idx: Vec<usize> = (0..self.probs.len())
            .filter(|&i| self.probs[i] > 0.0)
            .collect();
        idx.sort_by(|&a, &b| self.probs[b].total_cmp(&self.probs[a]).then(a.cmp(&b)));
        idx.into_iter()
            .take(k)
            .map(|i| (bitstring(i, self.n_bits), self.probs[i]))
            .collect()
    }
}

/// Collect bits `bits[k]` of `index` into bit `k` of the result.
pub(crate) fn gather_bits(index: usize, bits: &[usize]) -> usize {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (k, &b)| acc | (((index >> b) & 1) << k))
}

pub fn bitstring(index: usize, n_bits: usize) -> String {
    (0..n_bits)
        .rev()
        .map(|b| if (index >> b) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn parse_bitstring(s: &str, n_bits: usize) -> Result<usize> {
    if s.len() != n_bits {
        return Err(Error::InvalidParams(format!(
            "bitstring `{s}` has {} bits, expected {n_bits}",
            s.len()
        )));
    }
    s.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::InvalidParams(format!("bad bitstring `{s}`"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> Circuit {
        let mut c = Circuit::new("bell", 2, 0);
        c.h(0).cx(0, 1);
        c
    }

    #[test]
    fn census_examples() {
        assert_eq!(gate_census(&bell()), Census { p: 1, q: 1 });
        assert_eq!(gate_census(&Circuit::new("e", 3, 0)), Census { p: 0, q: 0 });
    }

    #[test]
    fn census_excludes_measure_and_reset() {
        let mut c = Circuit::new("m", 2, 2);
        c.h(0).cx(0, 1).measure(0, 0).measure(1, 1);
        c.push(Gate::new(GateKind::Reset, &[0]));
        let k = gate_census(&c);
        assert_eq!(k.p + k.q + 3, c.gates.len());
    }

    #[test]
    fn validate_rejects_bad_gates() {
        let mut c = Circuit::new("bad", 2, 0);
        c.cx(0, 0);
        assert!(c.validate().is_err());
        let mut c = Circuit::new("bad", 2, 0);
        c.h(2);
        assert!(matches!(c.validate(), Err(Error::IndexOutOfRange(_))));
        let mut c = Circuit::new("bad", 1, 1);
        c.push(Gate::new(GateKind::X, &[0]).conditioned(0, 1));
        assert!(c.validate().is_err());
        let mut c = Circuit::new("ok", 1, 1);
        c.measure(0, 0).push(Gate::new(GateKind::X, &[0]).conditioned(0, 1));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn bitstrings_are_msb_first() {
        assert_eq!(bitstring(0b101, 3), "101");
        assert_eq!(bitstring(1, 3), "001");
        assert_eq!(parse_bitstring("100", 3).unwrap(), 4);
        let d = Distribution::from_bitstrings(2, &[("10", 1.0)]).unwrap();
        assert_eq!(d.probs, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn marginal_and_top_k() {
        let d = Distribution::from_bitstrings(2, &[("00", 0.25), ("01", 0.25), ("11", 0.5)]).unwrap();
        let m = d.marginal(&[1]);
        assert_eq!(m.probs, vec![0.5, 0.5]);
        assert_eq!(d.top_k(1), vec![("11".to_string(), 0.5)]);
        assert_eq!(d.top_k(5).len(), 3);
    }
}
