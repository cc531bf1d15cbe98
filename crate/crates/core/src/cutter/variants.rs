use serde::{Deserialize, Serialize};

use super::SubcircuitSpec;
use crate::circuit::{Circuit, Gate, GateKind};

/// Measurement basis on an upstream cut. `I` runs the `Z` circuit and
/// counts every outcome as +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    I,
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 4] = [Basis::I, Basis::X, Basis::Y, Basis::Z];

    /// The basis actually measured.
    pub fn physical(self) -> Basis {
        match self {
            Basis::I => Basis::Z,
            b => b,
        }
    }
}

/// Preparation of a downstream cut qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InitState {
    Zero,
    One,
    Plus,
    PlusI,
}

impl InitState {
    pub const ALL: [InitState; 4] = [InitState::Zero, InitState::One, InitState::Plus, InitState::PlusI];
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubcircuitVariant {
    pub spec_id: usize,
    pub bases: Vec<Basis>,
    pub inits: Vec<InitState>,
    /// Spec circuit with preparations prepended and one extra clbit per
    /// upstream cut, after the spec's own clbits.
    pub circuit: Circuit,
}

impl SubcircuitVariant {
    pub fn new(spec: &SubcircuitSpec, bases: &[Basis], inits: &[InitState]) -> Self {
        assert_eq!(bases.len(), spec.upstream_cuts.len());
        assert_eq!(inits.len(), spec.downstream_cuts.len());
        let base = spec.circuit.n_clbits;
        let mut c = Circuit::new(
            format!("{}[{}]", spec.circuit.name, label(bases, inits)),
            spec.sq(),
            base + bases.len(),
        );
        for (role, init) in spec.downstream_cuts.iter().zip(inits) {
            let q = role.local;
            match init {
                InitState::Zero => {}
                InitState::One => {
                    c.x(q);
                }
                InitState::Plus => {
                    c.h(q);
                }
                InitState::PlusI => {
                    c.h(q).push(Gate::new(GateKind::S, &[q]));
                }
            }
        }
        c.gates.extend(spec.circuit.gates.iter().cloned());
        for (k, (role, basis)) in spec.upstream_cuts.iter().zip(bases).enumerate() {
            let q = role.local;
            match basis.physical() {
                Basis::X => {
                    c.h(q);
                }
                Basis::Y => {
                    c.push(Gate::new(GateKind::Sdg, &[q])).h(q);
                }
                _ => {}
            }
            c.measure(q, base + k);
        }
        SubcircuitVariant {
            spec_id: spec.id,
            bases: bases.to_vec(),
            inits: inits.to_vec(),
            circuit: c,
        }
    }

    /// Two variants with equal keys run the same circuit.
    pub fn physical_key(&self) -> (Vec<Basis>, Vec<InitState>) {
        (self.bases.iter().map(|b| b.physical()).collect(), self.inits.clone())
    }

    pub fn label(&self) -> String {
        label(&self.bases, &self.inits)
    }
}

fn label(bases: &[Basis], inits: &[InitState]) -> String {
    let b: String = bases
        .iter()
        .map(|b| match b {
            Basis::I => 'I',
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        })
        .collect();
    let i: String = inits
        .iter()
        .map(|s| match s {
            InitState::Zero => '0',
            InitState::One => '1',
            InitState::Plus => '+',
            InitState::PlusI => 'i',
        })
        .collect();
    format!("{b}|{i}")
}

/// Mixed-radix walk: the first entry varies fastest.
fn assignments<T: Copy>(choices: &[T], n: usize) -> Vec<Vec<T>> {
    let total = choices.len().pow(n as u32);
    (0..total)
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let v = choices[k % choices.len()];
                    k /= choices.len();
                    v
                })
                .collect()
        })
        .collect()
}

/// Every basis/preparation combination: `4^(u+d)` variants.
pub fn enumerate_variants(spec: &SubcircuitSpec) -> Vec<SubcircuitVariant> {
    let (u, d) = (spec.upstream_cuts.len(), spec.downstream_cuts.len());
    let inits = assignments(&InitState::ALL, d);
    let bases = assignments(&Basis::ALL, u);
    inits
        .iter()
        .flat_map(|i| bases.iter().map(move |b| SubcircuitVariant::new(spec, b, i)))
        .collect()
}

/// The distinct circuits behind [`enumerate_variants`]: `3^u * 4^d`.
pub fn physical_variants(spec: &SubcircuitSpec) -> Vec<SubcircuitVariant> {
    let (u, d) = (spec.upstream_cuts.len(), spec.downstream_cuts.len());
    let inits = assignments(&InitState::ALL, d);
    let bases = assignments(&[Basis::X, Basis::Y, Basis::Z], u);
    inits
        .iter()
        .flat_map(|i| bases.iter().map(move |b| SubcircuitVariant::new(spec, b, i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutter::{extract_subcircuits, CutPlan, CutPoint};

    fn chain3() -> Vec<SubcircuitSpec> {
        let mut c = Circuit::new("c", 3, 0);
        c.h(0).cx(0, 1).cx(1, 2).cx(1, 2);
        let plan = CutPlan {
            cuts: vec![CutPoint::new(1, 1)],
            subcircuit_count: 2,
            greedy: false,
        };
        extract_subcircuits(&c, &plan).unwrap()
    }

    #[test]
    fn variant_counts() {
        let specs = chain3();
        assert_eq!(enumerate_variants(&specs[0]).len(), 4);
        assert_eq!(physical_variants(&specs[0]).len(), 3);
        assert_eq!(enumerate_variants(&specs[1]).len(), 4);
        let whole = extract_subcircuits(
            &specs[0].circuit,
            &CutPlan {
                cuts: vec![],
                subcircuit_count: 1,
                greedy: false,
            },
        )
        .unwrap();
        let v = enumerate_variants(&whole[0]);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].circuit.gates, whole[0].circuit.gates);
    }

    #[test]
    fn bases_and_inits_emit_expected_gates() {
        let specs = chain3();
        let x = SubcircuitVariant::new(&specs[0], &[Basis::X], &[]);
        let tail: Vec<GateKind> = x.circuit.gates.iter().rev().take(2).map(|g| g.kind).collect();
        assert_eq!(tail, vec![GateKind::Measure, GateKind::H]);
        let i = SubcircuitVariant::new(&specs[0], &[Basis::I], &[]);
        let z = SubcircuitVariant::new(&specs[0], &[Basis::Z], &[]);
        assert_eq!(i.circuit.gates, z.circuit.gates);
        assert_eq!(i.physical_key(), z.physical_key());
        let pi = SubcircuitVariant::new(&specs[1], &[], &[InitState::PlusI]);
        let head: Vec<GateKind> = pi.circuit.gates.iter().take(2).map(|g| g.kind).collect();
        assert_eq!(head, vec![GateKind::H, GateKind::S]);
    }
}
