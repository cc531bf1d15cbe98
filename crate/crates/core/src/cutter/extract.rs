use serde::{Deserialize, Serialize};

use super::{partition, CutPlan, CutPoint};
use crate::circuit::{Census, Circuit, Condition, Gate};
use crate::error::{Error, Result};

/// One endpoint of a cut inside a fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutRole {
    pub local: usize,
    pub cut: CutPoint,
}

/// A fragment re-indexed onto local qubits.
///
/// Local clbits `0..output_map.len()` are outputs, `output_map[k]` naming the
/// original clbit behind local clbit `k`. Any further clbits are auxiliary
/// (mid-circuit results that are not part of the output).
#[derive(Debug, Clone, PartialEq)]
pub struct SubcircuitSpec {
    pub id: usize,
    pub circuit: Circuit,
    /// Original qubit of each local qubit; `None` for added ancillas.
    pub qubit_map: Vec<Option<usize>>,
    pub upstream_cuts: Vec<CutRole>,
    pub downstream_cuts: Vec<CutRole>,
    pub output_map: Vec<usize>,
}

impl SubcircuitSpec {
    pub fn sq(&self) -> usize {
        self.circuit.n_qubits
    }

    pub fn n_outputs(&self) -> usize {
        self.output_map.len()
    }

    pub fn n_aux(&self) -> usize {
        self.circuit.n_clbits - self.output_map.len()
    }

    pub fn census(&self) -> Census {
        self.circuit.census()
    }

    /// Upstream plus downstream cut endpoints.
    pub fn n_roles(&self) -> usize {
        self.upstream_cuts.len() + self.downstream_cuts.len()
    }

    /// Cuts running from `self` into `other`.
    pub fn cuts_into(&self, other: &SubcircuitSpec) -> Vec<CutPoint> {
        self.upstream_cuts
            .iter()
            .filter(|u| other.downstream_cuts.iter().any(|d| d.cut == u.cut))
            .map(|u| u.cut)
            .collect()
    }

    /// Cuts shared with `other` in either direction.
    pub fn shared_cuts(&self, other: &SubcircuitSpec) -> Vec<CutPoint> {
        let mut v = self.cuts_into(other);
        v.extend(other.cuts_into(self));
        v.sort();
        v
    }
}

/// A cut between two entries of a spec list, by position in that list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutEdge {
    pub cut: CutPoint,
    pub upstream: usize,
    pub downstream: usize,
}

/// Match every cut's upstream endpoint with its downstream endpoint.
pub fn cut_edges(specs: &[SubcircuitSpec]) -> Result<Vec<CutEdge>> {
    let mut edges = Vec::new();
    for (i, s) in specs.iter().enumerate() {
        for u in &s.upstream_cuts {
            let mut found = specs
                .iter()
                .enumerate()
                .filter(|(_, t)| t.downstream_cuts.iter().any(|d| d.cut == u.cut));
            let (j, _) = found
                .next()
                .ok_or_else(|| Error::Structural(format!("cut {:?} has no downstream end", u.cut)))?;
            if found.next().is_some() {
                return Err(Error::Structural(format!("cut {:?} has two downstream ends", u.cut)));
            }
            edges.push(CutEdge {
                cut: u.cut,
                upstream: i,
                downstream: j,
            });
        }
    }
    let downs: usize = specs.iter().map(|s| s.downstream_cuts.len()).sum();
    if downs != edges.len() {
        return Err(Error::Structural("a downstream cut end has no upstream end".into()));
    }
    edges.sort_by_key(|e| e.cut);
    Ok(edges)
}

fn whole(circuit: &Circuit) -> SubcircuitSpec {
    let full = circuit.with_implicit_measurements();
    SubcircuitSpec {
        id: 0,
        qubit_map: (0..full.n_qubits).map(Some).collect(),
        upstream_cuts: Vec::new(),
        downstream_cuts: Vec::new(),
        output_map: (0..full.n_clbits).collect(),
        circuit: Circuit {
            name: format!("{}#0", circuit.name),
            ..full
        },
    }
}

/// Split `circuit` along `plan` into fragments numbered by their first gate.
pub fn extract_subcircuits(circuit: &Circuit, plan: &CutPlan) -> Result<Vec<SubcircuitSpec>> {
    circuit.validate()?;
    if plan.cuts.is_empty() && plan.subcircuit_count == 1 {
        return Ok(vec![whole(circuit)]);
    }
    let full = circuit.with_implicit_measurements();
    let part = partition(&full, &plan.cuts).map_err(Error::InconsistentPlan)?;
    if part.n_fragments != plan.subcircuit_count {
        return Err(Error::InconsistentPlan(format!(
            "plan claims {} subcircuits, cuts induce {}",
            plan.subcircuit_count, part.n_fragments
        )));
    }

    let mut clbit_home = vec![0usize; full.n_clbits];
    for (i, g) in full.gates.iter().enumerate() {
        if let Some(c) = g.clbit {
            clbit_home[c] = part.gate_fragment[i];
        }
    }

    let mut specs = Vec::with_capacity(part.n_fragments);
    for f in 0..part.n_fragments {
        let nodes: Vec<usize> = (0..part.nodes.len()).filter(|&k| part.fragment[k] == f).collect();
        let local = |node: usize| nodes.iter().position(|&k| k == node).unwrap();
        let outputs: Vec<usize> = (0..full.n_clbits).filter(|&c| clbit_home[c] == f).collect();
        let local_clbit = |c: usize| outputs.iter().position(|&o| o == c).unwrap();

        let mut sub = Circuit::new(format!("{}#{f}", circuit.name), nodes.len(), outputs.len());
        for (i, g) in full.gates.iter().enumerate() {
            if part.gate_fragment[i] != f {
                continue;
            }
            sub.gates.push(Gate {
                kind: g.kind,
                qubits: part.gate_nodes[i].iter().map(|&n| local(n)).collect(),
                params: g.params.clone(),
                clbit: g.clbit.map(local_clbit),
                condition: g.condition.map(|c| Condition {
                    bit: local_clbit(c.bit),
                    value: c.value,
                }),
                epr_link: g.epr_link,
            });
        }
        let mut upstream_cuts = Vec::new();
        let mut downstream_cuts = Vec::new();
        for (cut, &(a, b)) in plan.cuts.iter().zip(&part.cut_nodes) {
            if part.fragment[a] == f {
                upstream_cuts.push(CutRole { local: local(a), cut: *cut });
            }
            if part.fragment[b] == f {
                downstream_cuts.push(CutRole { local: local(b), cut: *cut });
            }
        }
        upstream_cuts.sort_by_key(|r| r.cut);
        downstream_cuts.sort_by_key(|r| r.cut);
        specs.push(SubcircuitSpec {
            id: f,
            qubit_map: nodes.iter().map(|&k| Some(part.nodes[k].0)).collect(),
            circuit: sub,
            upstream_cuts,
            downstream_cuts,
            output_map: outputs,
        });
    }
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;

    fn bell() -> Circuit {
        let mut c = Circuit::new("bell", 2, 0);
        c.h(0).cx(0, 1);
        c
    }

    #[test]
    fn bell_cut_after_h() {
        let plan = CutPlan {
            cuts: vec![CutPoint::new(0, 0)],
            subcircuit_count: 2,
            greedy: false,
        };
        let specs = extract_subcircuits(&bell(), &plan).unwrap();
        assert_eq!(specs.len(), 2);
        let (up, down) = (&specs[0], &specs[1]);
        assert_eq!(up.circuit.gates.len(), 1);
        assert_eq!(up.circuit.gates[0].kind, GateKind::H);
        assert_eq!(up.upstream_cuts.len(), 1);
        assert!(up.output_map.is_empty());
        assert_eq!(down.downstream_cuts.len(), 1);
        assert_eq!(down.circuit.gates[0].kind, GateKind::CX);
        assert_eq!(down.output_map, vec![0, 1]);
        assert_eq!(down.sq(), 2);
        let edges = cut_edges(&specs).unwrap();
        assert_eq!((edges[0].upstream, edges[0].downstream), (0, 1));
    }

    #[test]
    fn uncut_plan_is_identity() {
        let plan = CutPlan {
            cuts: vec![],
            subcircuit_count: 1,
            greedy: false,
        };
        let specs = extract_subcircuits(&bell(), &plan).unwrap();
        assert_eq!(specs.len(), 1);
        assert_eq!(specs[0].circuit.gates, bell().with_implicit_measurements().gates);
    }

    #[test]
    fn inconsistent_plan_rejected() {
        let plan = CutPlan {
            cuts: vec![CutPoint::new(1, 0)],
            subcircuit_count: 2,
            greedy: false,
        };
        assert!(matches!(extract_subcircuits(&bell(), &plan), Err(Error::InconsistentPlan(_))));
        let plan = CutPlan {
            cuts: vec![CutPoint::new(0, 0)],
            subcircuit_count: 3,
            greedy: false,
        };
        assert!(matches!(extract_subcircuits(&bell(), &plan), Err(Error::InconsistentPlan(_))));
    }
}
