//! Pair selection for EPR links, the teleportation merge, and end-to-end
//! planning from a circuit to executable units.

use serde::{Deserialize, Serialize};

use crate::circuit::{Census, Circuit, Condition, Gate, GateKind};
use crate::config::{EChoice, SystemConfig};
use crate::cutter::{extract_subcircuits, find_cuts, CutPlan, CutPoint, CutRole, SubcircuitSpec};
use crate::error::{Error, Result, Stage};
use crate::scheduler;

/// Two adjacent subcircuits joined through EPR-assisted teleportation.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedSpec {
    /// Ids of the upstream and downstream constituents.
    pub pair: (usize, usize),
    /// Cuts replaced by teleportation.
    pub consumed: Vec<CutPoint>,
    /// The joint circuit; its remaining cut roles are those of the
    /// constituents minus `consumed`.
    pub spec: SubcircuitSpec,
    /// Per local qubit: 0 for the upstream device, 1 for the downstream one.
    pub side: Vec<usize>,
    pub part_qubits: [usize; 2],
    pub part_census: [Census; 2],
}

impl MergedSpec {
    /// Qubits each device must provide: a constituent plus one link qubit
    /// per consumed cut.
    pub fn side_demand(&self) -> [usize; 2] {
        let c = self.consumed.len();
        [self.part_qubits[0] + c, self.part_qubits[1] + c]
    }

    /// Which constituent stands in for the pair in overhead terms: the one
    /// with more qubits, the upstream one on ties.
    pub fn larger(&self) -> usize {
        if self.part_qubits[1] > self.part_qubits[0] {
            1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Unit {
    Single(SubcircuitSpec),
    Merged(MergedSpec),
}

impl Unit {
    pub fn spec(&self) -> &SubcircuitSpec {
        match self {
            Unit::Single(s) => s,
            Unit::Merged(m) => &m.spec,
        }
    }

    pub fn is_merged(&self) -> bool {
        matches!(self, Unit::Merged(_))
    }

    /// Qubits counted in the dimension factor of the cost model; link
    /// ancillas are not part of the reconstructed state.
    pub fn cost_qubits(&self) -> usize {
        match self {
            Unit::Single(s) => s.sq(),
            Unit::Merged(m) => m.part_qubits[0] + m.part_qubits[1],
        }
    }

    /// Scheduling priority: two-qubit gates count double.
    pub fn weight(&self) -> usize {
        self.spec().census().weight()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergePlan {
    /// Selected `(spec id, spec id)` pairs, lower id first, in selection order.
    pub pairs: Vec<(usize, usize)>,
    /// EPR pairs used: one per consumed cut.
    pub e: usize,
    pub requested: usize,
    pub shortfall: bool,
}

/// Some ordered pair of distinct workers can host the two sides.
pub fn pair_feasible(demand: [usize; 2], capacities: &[usize]) -> bool {
    (0..capacities.len()).any(|a| {
        (0..capacities.len()).any(|b| a != b && demand[0] <= capacities[a] && demand[1] <= capacities[b])
    })
}

pub(crate) fn merge_demand(a: &SubcircuitSpec, b: &SubcircuitSpec) -> Option<[usize; 2]> {
    let forward = a.cuts_into(b);
    let backward = b.cuts_into(a);
    match (forward.len(), backward.len()) {
        (0, 0) => None,
        (c, 0) => Some([a.sq() + c, b.sq() + c]),
        (0, c) => Some([b.sq() + c, a.sq() + c]),
        // both directions cannot happen in an acyclic plan
        _ => None,
    }
}

/// Choose subcircuit pairs to join, spending at most `e` EPR pairs.
///
/// Adjacent pairs are ranked by combined qubit count, ascending, ties by
/// pair, and taken from the top of that list. A pair is skipped when it
/// shares a subcircuit with an earlier choice, needs more EPR pairs than
/// remain, or fits no two distinct workers.
pub fn select_subcircuit_pairs(specs: &[SubcircuitSpec], e: usize, capacities: &[usize]) -> MergePlan {
    let mut candidates: Vec<(usize, (usize, usize))> = Vec::new();
    for i in 0..specs.len() {
        for j in i + 1..specs.len() {
            if !specs[i].shared_cuts(&specs[j]).is_empty() {
                candidates.push((specs[i].sq() + specs[j].sq(), (i, j)));
            }
        }
    }
    candidates.sort();
    let mut used = vec![false; specs.len()];
    let mut pairs = Vec::new();
    let mut spent = 0;
    while spent < e {
        let Some((_, (i, j))) = candidates.pop() else {
            break;
        };
        if used[i] || used[j] {
            continue;
        }
        let links = specs[i].shared_cuts(&specs[j]).len();
        if spent + links > e {
            continue;
        }
        match merge_demand(&specs[i], &specs[j]) {
            Some(d) if pair_feasible(d, capacities) => {}
            _ => continue,
        }
        used[i] = true;
        used[j] = true;
        spent += links;
        pairs.push((specs[i].id, specs[j].id));
    }
    MergePlan {
        pairs,
        e: spent,
        requested: e,
        shortfall: spent < e,
    }
}

fn remap_gate(g: &Gate, qubit: impl Fn(usize) -> usize, clbit: impl Fn(usize) -> usize) -> Gate {
    Gate {
        kind: g.kind,
        qubits: g.qubits.iter().map(|&q| qubit(q)).collect(),
        params: g.params.clone(),
        clbit: g.clbit.map(&clbit),
        condition: g.condition.map(|c| Condition {
            bit: clbit(c.bit),
            value: c.value,
        }),
        epr_link: g.epr_link,
    }
}

/// Join two adjacent subcircuits. Each shared cut becomes a teleportation:
/// a link qubit on the upstream device and the downstream cut qubit are
/// entangled, the upstream cut qubit is measured in the Bell basis against
/// the link qubit, and the outcomes drive X and Z corrections downstream.
pub fn apply_epr(a: &SubcircuitSpec, b: &SubcircuitSpec) -> Result<MergedSpec> {
    let (up, down) = if !a.cuts_into(b).is_empty() {
        (a, b)
    } else if !b.cuts_into(a).is_empty() {
        (b, a)
    } else {
        return Err(Error::NotAdjacent(a.id, b.id));
    };
    if !down.cuts_into(up).is_empty() {
        return Err(Error::Structural(format!(
            "subcircuits {} and {} feed each other",
            up.id, down.id
        )));
    }
    let consumed = up.cuts_into(down);
    let c = consumed.len();
    let (su, sd) = (up.sq(), down.sq());
    let off = su + c;
    let (uo, dout) = (up.n_outputs(), down.n_outputs());
    let n_out = uo + dout;
    let (ua, da) = (up.n_aux(), down.n_aux());
    let link_aux = n_out + ua + da;

    let mut circ = Circuit::new(
        format!("{}+{}", up.circuit.name, down.circuit.name),
        su + c + sd,
        link_aux + 2 * c,
    );
    let up_clbit = |k: usize| if k < uo { k } else { n_out + (k - uo) };
    let down_clbit = |k: usize| if k < dout { uo + k } else { n_out + ua + (k - dout) };
    for g in &up.circuit.gates {
        circ.gates.push(remap_gate(g, |q| q, up_clbit));
    }
    for (t, cut) in consumed.iter().enumerate() {
        let src = up.upstream_cuts.iter().find(|r| r.cut == *cut).unwrap().local;
        let dst = off + down.downstream_cuts.iter().find(|r| r.cut == *cut).unwrap().local;
        let link = su + t;
        let (m_link, m_src) = (link_aux + 2 * t, link_aux + 2 * t + 1);
        circ.h(link);
        circ.push(Gate::new(GateKind::CX, &[link, dst]).epr());
        circ.cx(src, link).h(src);
        circ.measure(link, m_link).measure(src, m_src);
        circ.push(Gate::new(GateKind::X, &[dst]).conditioned(m_link, 1));
        circ.push(Gate::new(GateKind::Z, &[dst]).conditioned(m_src, 1));
    }
    for g in &down.circuit.gates {
        circ.gates.push(remap_gate(g, |q| off + q, down_clbit));
    }

    let keep = |r: &&CutRole| !consumed.contains(&r.cut);
    let mut upstream_cuts: Vec<CutRole> = up.upstream_cuts.iter().filter(keep).copied().collect();
    upstream_cuts.extend(
        down.upstream_cuts
            .iter()
            .map(|r| CutRole { local: off + r.local, cut: r.cut }),
    );
    let mut downstream_cuts: Vec<CutRole> = up.downstream_cuts.clone();
    downstream_cuts.extend(
        down.downstream_cuts
            .iter()
            .filter(keep)
            .map(|r| CutRole { local: off + r.local, cut: r.cut }),
    );
    upstream_cuts.sort_by_key(|r| r.cut);
    downstream_cuts.sort_by_key(|r| r.cut);

    let mut qubit_map = up.qubit_map.clone();
    qubit_map.extend(std::iter::repeat_n(None, c));
    qubit_map.extend(down.qubit_map.iter().copied());
    let mut output_map = up.output_map.clone();
    output_map.extend(down.output_map.iter().copied());
    let mut side = vec![0; su + c];
    side.extend(std::iter::repeat_n(1, sd));

    Ok(MergedSpec {
        pair: (up.id, down.id),
        consumed,
        spec: SubcircuitSpec {
            id: up.id.min(down.id),
            circuit: circ,
            qubit_map,
            upstream_cuts,
            downstream_cuts,
            output_map,
        },
        side,
        part_qubits: [su, sd],
        part_census: [up.census(), down.census()],
    })
}

/// Replace every selected pair by its merge. Units keep the order of their
/// lowest constituent id and are renumbered from 0.
pub fn build_units(specs: &[SubcircuitSpec], merges: &MergePlan) -> Result<Vec<Unit>> {
    let mut units = Vec::new();
    for s in specs {
        match merges.pairs.iter().find(|(i, j)| *i == s.id || *j == s.id) {
            None => units.push(Unit::Single(s.clone())),
            Some(&(i, j)) if i == s.id => {
                let other = specs
                    .iter()
                    .find(|t| t.id == j)
                    .ok_or_else(|| Error::Structural(format!("merge names unknown subcircuit {j}")))?;
                units.push(Unit::Merged(apply_epr(s, other)?));
            }
            Some(_) => {}
        }
    }
    for (k, u) in units.iter_mut().enumerate() {
        match u {
            Unit::Single(s) => s.id = k,
            Unit::Merged(m) => m.spec.id = k,
        }
    }
    Ok(units)
}

/// Everything decided before execution.
#[derive(Debug, Clone)]
pub struct EprPlan {
    pub cut_plan: CutPlan,
    pub specs: Vec<SubcircuitSpec>,
    pub merge_plan: MergePlan,
    pub units: Vec<Unit>,
}

impl EprPlan {
    /// Two per cut of the original plan.
    pub fn k(&self) -> usize {
        2 * self.cut_plan.cuts.len()
    }
}

/// Cut the circuit and extract its subcircuits.
pub fn cut(circuit: &Circuit, system: &SystemConfig) -> Result<(CutPlan, Vec<SubcircuitSpec>)> {
    let plan = find_cuts(circuit, &system.capacities(), system.reserve)?;
    let specs = extract_subcircuits(circuit, &plan)?;
    Ok((plan, specs))
}

/// Merge `e` EPR pairs' worth of subcircuits on top of an existing cut.
pub fn plan_with_e(cut_plan: &CutPlan, specs: &[SubcircuitSpec], e: usize, system: &SystemConfig) -> Result<EprPlan> {
    let merge_plan = select_subcircuit_pairs(specs, e, &system.capacities());
    let units = build_units(specs, &merge_plan)?;
    Ok(EprPlan {
        cut_plan: cut_plan.clone(),
        specs: specs.to_vec(),
        merge_plan,
        units,
    })
}

/// Cut, choose how many EPR pairs to spend, and merge. With `EChoice::Auto`
/// every count up to the budget is scheduled and costed, and the cheapest
/// wins (the smaller count on ties).
pub fn plan(circuit: &Circuit, system: &SystemConfig) -> Result<EprPlan> {
    system.validate()?;
    let (cut_plan, specs) = cut(circuit, system)?;
    plan_from_cuts(&cut_plan, &specs, system)
}

/// The EPR decision on top of a fixed cut.
pub fn plan_from_cuts(cut_plan: &CutPlan, specs: &[SubcircuitSpec], system: &SystemConfig) -> Result<EprPlan> {
    match system.e {
        EChoice::Fixed(e) => plan_with_e(cut_plan, specs, e, system),
        EChoice::Auto => {
            let mut best: Option<(f64, EprPlan)> = None;
            for e in 0..=system.epr.budget {
                let p = plan_with_e(cut_plan, specs, e, system)?;
                if p.merge_plan.e < e {
                    break;
                }
                let placement = scheduler::schedule(&p.units, system).map_err(|err| err.at(Stage::Schedule))?;
                let cost = scheduler::cost_report(&p, &placement, system)?;
                if best.as_ref().is_none_or(|(c, _)| cost.log_seme < *c) {
                    best = Some((cost.log_seme, p));
                }
            }
            Ok(best.expect("e = 0 always plans").1)
        }
    }
}
