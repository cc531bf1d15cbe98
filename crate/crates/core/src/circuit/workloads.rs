//! Benchmark circuit generators, lowered to the native gate set.
//!
//! HWEA and SUPREMACY are documented stand-ins: per-layer RY/RZ plus a
//! linear CX chain, and random single-qubit rotations between shifting CZ
//! bricks respectively.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkloadKind {
    Bv,
    Adder,
    Hwea,
    Supremacy,
}

impl std::str::FromStr for WorkloadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bv" => Ok(WorkloadKind::Bv),
            "adder" => Ok(WorkloadKind::Adder),
            "hwea" => Ok(WorkloadKind::Hwea),
            "supremacy" => Ok(WorkloadKind::Supremacy),
            other => Err(Error::InvalidParams(format!("unknown workload `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadParams {
    /// Hidden string, MSB first; its length must equal `n_qubits`.
    Bv { secret: String },
    /// Operands loaded into the two `(n_qubits - 2) / 2`-bit registers.
    Adder { a: u64, b: u64 },
    Hwea { layers: usize },
    Supremacy { depth: usize },
}

impl WorkloadParams {
    fn kind(&self) -> WorkloadKind {
        match self {
            WorkloadParams::Bv { .. } => WorkloadKind::Bv,
            WorkloadParams::Adder { .. } => WorkloadKind::Adder,
            WorkloadParams::Hwea { .. } => WorkloadKind::Hwea,
            WorkloadParams::Supremacy { .. } => WorkloadKind::Supremacy,
        }
    }
}

pub fn generate_workload(
    kind: WorkloadKind,
    n_qubits: usize,
    params: &WorkloadParams,
    seed: u64,
) -> Result<Circuit> {
    if params.kind() != kind {
        return Err(Error::InvalidParams(format!(
            "parameters for {:?} given to {kind:?}",
            params.kind()
        )));
    }
    let min = match kind {
        WorkloadKind::Bv | WorkloadKind::Hwea => 2,
        WorkloadKind::Adder | WorkloadKind::Supremacy => 4,
    };
    if n_qubits < min {
        return Err(Error::InvalidParams(format!(
            "{kind:?} needs at least {min} qubits, got {n_qubits}"
        )));
    }
    let c = match params {
        WorkloadParams::Bv { secret } => bv(n_qubits, secret)?,
        WorkloadParams::Adder { a, b } => adder(n_qubits, *a, *b)?,
        WorkloadParams::Hwea { layers } => hwea(n_qubits, *layers, seed)?,
        WorkloadParams::Supremacy { depth } => supremacy(n_qubits, *depth, seed)?,
    };
    debug_assert!(c.validate().is_ok());
    Ok(c)
}

fn bv(n: usize, secret: &str) -> Result<Circuit> {
    if secret.len() != n || !secret.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::InvalidParams(format!(
            "secret `{secret}` must be a {n}-bit binary string"
        )));
    }
    let bits: Vec<bool> = secret.chars().rev().map(|c| c == '1').collect();
    let anc = n;
    let mut c = Circuit::new(format!("bv_{secret}"), n + 1, n);
    for q in 0..n {
        c.h(q);
    }
    c.x(anc).h(anc);
    for (q, &bit) in bits.iter().enumerate() {
        if bit {
            c.cx(q, anc);
        }
    }
    for q in 0..n {
        c.h(q);
    }
    for q in 0..n {
        c.measure(q, q);
    }
    Ok(c)
}

/// Toffoli lowered to H/T/Tdg/CX.
fn ccx(c: &mut Circuit, a: usize, b: usize, t: usize) {
    use GateKind::{Tdg, T};
    let one = |c: &mut Circuit, k: GateKind, q: usize| {
        c.push(Gate::new(k, &[q]));
    };
    c.h(t);
    c.cx(b, t);
    one(c, Tdg, t);
    c.cx(a, t);
    one(c, T, t);
    c.cx(b, t);
    one(c, Tdg, t);
    c.cx(a, t);
    one(c, T, b);
    one(c, T, t);
    c.h(t);
    c.cx(a, b);
    one(c, T, a);
    one(c, Tdg, b);
    c.cx(a, b);
}

fn adder(n: usize, a: u64, b: u64) -> Result<Circuit> {
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "ADDER uses 2w+2 qubits; {n} is odd"
        )));
    }
    let w = (n - 2) / 2;
    if w < 64 && (a >> w != 0 || b >> w != 0) {
        return Err(Error::InvalidParams(format!(
            "operands {a}, {b} do not fit in {w} bits"
        )));
    }
    let cin = 0;
    let bq = |i: usize| 1 + 2 * i;
    let aq = |i: usize| 2 + 2 * i;
    let cout = 2 * w + 1;
    let mut c = Circuit::new(format!("adder_{w}"), n, w + 1);
    for i in 0..w {
        if (a >> i) & 1 == 1 {
            c.x(aq(i));
        }
        if (b >> i) & 1 == 1 {
            c.x(bq(i));
        }
    }
    let maj = |c: &mut Circuit, x: usize, y: usize, z: usize| {
        c.cx(z, y);
        c.cx(z, x);
        ccx(c, x, y, z);
    };
    let uma = |c: &mut Circuit, x: usize, y: usize, z: usize| {
        ccx(c, x, y, z);
        c.cx(z, x);
        c.cx(x, y);
    };
    maj(&mut c, cin, bq(0), aq(0));
    for i in 1..w {
        maj(&mut c, aq(i - 1), bq(i), aq(i));
    }
    c.cx(aq(w - 1), cout);
    for i in (1..w).rev() {
        uma(&mut c, aq(i - 1), bq(i), aq(i));
    }
    uma(&mut c, cin, bq(0), aq(0));
    for i in 0..w {
        c.measure(bq(i), i);
    }
    c.measure(cout, w);
    Ok(c)
}

fn hwea(n: usize, layers: usize, seed: u64) -> Result<Circuit> {
    if layers == 0 {
        return Err(Error::InvalidParams("HWEA needs at least one layer".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(format!("hwea_{n}x{layers}"), n, n);
    for _ in 0..layers {
        for q in 0..n {
            c.rot(GateKind::RY, q, rng.gen_range(0.0..2.0 * PI));
            c.rot(GateKind::RZ, q, rng.gen_range(0.0..2.0 * PI));
        }
        for q in 0..n - 1 {
            c.cx(q, q + 1);
        }
    }
    for q in 0..n {
        c.measure(q, q);
    }
    Ok(c)
}

fn supremacy(n: usize, depth: usize, seed: u64) -> Result<Circuit> {
    if depth == 0 {
        return Err(Error::InvalidParams("SUPREMACY needs depth >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(format!("supremacy_{n}x{depth}"), n, n);
    for q in 0..n {
        c.h(q);
    }
    const ROT: [GateKind; 3] = [GateKind::RX, GateKind::RY, GateKind::RZ];
    for cycle in 0..depth {
        for q in 0..n {
            let k = ROT[rng.gen_range(0..3)];
            c.rot(k, q, rng.gen_range(0.0..2.0 * PI));
        }
        let mut q = cycle % 2;
        while q + 1 < n {
            c.cz(q, q + 1);
            q += 2;
        }
    }
    for q in 0..n {
        c.measure(q, q);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gate_census;

    #[test]
    fn bv_census() {
        let c = generate_workload(WorkloadKind::Bv, 3, &WorkloadParams::Bv { secret: "101".into() }, 0)
            .unwrap();
        assert_eq!(c.n_qubits, 4);
        let k = gate_census(&c);
        assert_eq!((k.p, k.q), (8, 2));
    }

    #[test]
    fn hwea_census() {
        let c = generate_workload(WorkloadKind::Hwea, 4, &WorkloadParams::Hwea { layers: 1 }, 7).unwrap();
        let k = gate_census(&c);
        assert_eq!((k.p, k.q), (8, 3));
    }

    #[test]
    fn generators_are_deterministic() {
        let p = WorkloadParams::Supremacy { depth: 4 };
        let a = generate_workload(WorkloadKind::Supremacy, 5, &p, 3).unwrap();
        let b = generate_workload(WorkloadKind::Supremacy, 5, &p, 3).unwrap();
        let c = generate_workload(WorkloadKind::Supremacy, 5, &p, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_params() {
        let bad = |k, n, p: WorkloadParams| generate_workload(k, n, &p, 0).is_err();
        assert!(bad(WorkloadKind::Bv, 3, WorkloadParams::Bv { secret: "10".into() }));
        assert!(bad(WorkloadKind::Bv, 1, WorkloadParams::Bv { secret: "1".into() }));
        assert!(bad(WorkloadKind::Adder, 5, WorkloadParams::Adder { a: 0, b: 0 }));
        assert!(bad(WorkloadKind::Adder, 6, WorkloadParams::Adder { a: 4, b: 0 }));
        assert!(bad(WorkloadKind::Hwea, 4, WorkloadParams::Adder { a: 0, b: 0 }));
        assert!(bad(WorkloadKind::Supremacy, 3, WorkloadParams::Supremacy { depth: 2 }));
    }
}
