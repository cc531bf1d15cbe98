//! Wire-cut search, fragment extraction and variant enumeration.
//!
//! A cut `(q, p)` severs qubit `q`'s wire right after gate `p`. Each qubit's
//! wire becomes a chain of segments; segments joined by a two-qubit gate, or
//! by a classical bit they share, belong to the same fragment.

mod extract;
mod variants;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::cost;
use crate::error::{Error, Result};

pub use extract::{cut_edges, extract_subcircuits, CutEdge, CutRole, SubcircuitSpec};
pub use variants::{enumerate_variants, physical_variants, Basis, InitState, SubcircuitVariant};

/// Shots per variant assumed when ranking plans by predicted cost.
pub const SEARCH_SHOTS: u64 = 8192;

/// Upper bound on cut combinations examined before the search turns greedy.
pub const DEFAULT_SEARCH_BUDGET: u64 = 200_000;

/// Exhaustive search is only attempted up to this many qubits.
pub const EXHAUSTIVE_MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CutPoint {
    pub qubit: usize,
    pub position: usize,
}

impl CutPoint {
    pub fn new(qubit: usize, position: usize) -> Self {
        CutPoint { qubit, position }
    }
}

impl Ord for CutPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.position, self.qubit).cmp(&(other.position, other.qubit))
    }
}

impl PartialOrd for CutPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutPlan {
    pub cuts: Vec<CutPoint>,
    pub subcircuit_count: usize,
    /// True when the plan came from the greedy fallback.
    #[serde(default)]
    pub greedy: bool,
}

/// Segment graph of a circuit under a set of cuts.
#[derive(Debug, Clone)]
pub(crate) struct Partition {
    /// `(qubit, segment index)` for every segment that carries gates.
    pub nodes: Vec<(usize, usize)>,
    /// Fragment of each node, fragments numbered by their first gate.
    pub fragment: Vec<usize>,
    pub n_fragments: usize,
    /// Per gate, the fragment it lands in.
    pub gate_fragment: Vec<usize>,
    /// Per gate, the node of each qubit it acts on.
    pub gate_nodes: Vec<Vec<usize>>,
    /// Per cut (in the given order): upstream node, downstream node.
    pub cut_nodes: Vec<(usize, usize)>,
    /// Per fragment: qubit count.
    pub sizes: Vec<usize>,
    /// Per fragment: number of cut endpoints it holds.
    pub roles: Vec<usize>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Check that every cut names a gate on its qubit that has a successor.
pub(crate) fn check_cut(circuit: &Circuit, cut: &CutPoint) -> std::result::Result<(), String> {
    let g = circuit
        .gates
        .get(cut.position)
        .ok_or_else(|| format!("cut position {} past end of circuit", cut.position))?;
    if !g.acts_on(cut.qubit) {
        return Err(format!("gate {} does not act on qubit {}", cut.position, cut.qubit));
    }
    if !circuit.gates[cut.position + 1..].iter().any(|h| h.acts_on(cut.qubit)) {
        return Err(format!("nothing follows gate {} on qubit {}", cut.position, cut.qubit));
    }
    Ok(())
}

/// Build the fragment structure for `cuts` on a circuit that already carries
/// its output measurements. Fails on malformed cuts and on plans whose
/// fragment graph has a self-loop or a cycle.
pub(crate) fn partition(circuit: &Circuit, cuts: &[CutPoint]) -> std::result::Result<Partition, String> {
    let n = circuit.n_qubits;
    let mut sorted = cuts.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != cuts.len() {
        return Err("duplicate cut".into());
    }
    let mut per_qubit: Vec<Vec<usize>> = vec![Vec::new(); n];
    for c in cuts {
        if c.qubit >= n {
            return Err(format!("cut qubit {} out of range", c.qubit));
        }
        check_cut(circuit, c)?;
        per_qubit[c.qubit].push(c.position);
    }
    for v in per_qubit.iter_mut() {
        v.sort_unstable();
    }
    let mut offset = vec![0usize; n + 1];
    for q in 0..n {
        offset[q + 1] = offset[q] + per_qubit[q].len() + 1;
    }
    let seg = |q: usize, g: usize| offset[q] + per_qubit[q].partition_point(|&p| p < g);
    let total = offset[n];
    let mut uf = UnionFind::new(total);
    let mut used = vec![false; total];
    let mut first_gate = vec![usize::MAX; total];
    let mut writers: Vec<Vec<usize>> = vec![Vec::new(); circuit.n_clbits];
    for (i, g) in circuit.gates.iter().enumerate() {
        let ids: Vec<usize> = g.qubits.iter().map(|&q| seg(q, i)).collect();
        for &id in &ids {
            used[id] = true;
            first_gate[id] = first_gate[id].min(i);
        }
        if ids.len() == 2 {
            uf.union(ids[0], ids[1]);
        }
        if let Some(c) = g.clbit {
            writers[c].push(ids[0]);
        }
        if let Some(c) = g.condition {
            writers[c.bit].push(ids[0]);
        }
    }
    for w in &writers {
        for pair in w.windows(2) {
            uf.union(pair[0], pair[1]);
        }
    }

    // Number fragments by the earliest gate they contain.
    let mut root_first: Vec<(usize, usize)> = Vec::new();
    for id in 0..total {
        if used[id] {
            let r = uf.find(id);
            match root_first.iter_mut().find(|(root, _)| *root == r) {
                Some(e) => e.1 = e.1.min(first_gate[id]),
                None => root_first.push((r, first_gate[id])),
            }
        }
    }
    root_first.sort_by_key(|&(_, f)| f);
    let frag_of_root = |r: usize| root_first.iter().position(|&(root, _)| root == r).unwrap();

    let mut nodes = Vec::new();
    let mut node_index = vec![usize::MAX; total];
    let mut fragment = Vec::new();
    let mut sizes = vec![0usize; root_first.len()];
    for q in 0..n {
        for s in 0..=per_qubit[q].len() {
            let id = offset[q] + s;
            if used[id] {
                let f = frag_of_root(uf.find(id));
                node_index[id] = nodes.len();
                nodes.push((q, s));
                fragment.push(f);
                sizes[f] += 1;
            }
        }
    }
    let gate_nodes: Vec<Vec<usize>> = circuit
        .gates
        .iter()
        .enumerate()
        .map(|(i, g)| g.qubits.iter().map(|&q| node_index[seg(q, i)]).collect())
        .collect();
    let gate_fragment = gate_nodes.iter().map(|ns| fragment[ns[0]]).collect();

    let m = root_first.len();
    let mut roles = vec![0usize; m];
    let mut cut_nodes = Vec::with_capacity(cuts.len());
    let mut adj = vec![Vec::new(); m];
    let mut indeg = vec![0usize; m];
    for c in cuts {
        let up = seg(c.qubit, c.position);
        let (a, b) = (node_index[up], node_index[up + 1]);
        let (fa, fb) = (fragment[a], fragment[b]);
        if fa == fb {
            return Err(format!("cut on qubit {} after gate {} does not separate anything", c.qubit, c.position));
        }
        cut_nodes.push((a, b));
        roles[fa] += 1;
        roles[fb] += 1;
        adj[fa].push(fb);
        indeg[fb] += 1;
    }
    let mut stack: Vec<usize> = (0..m).filter(|&f| indeg[f] == 0).collect();
    let mut seen = 0;
    while let Some(f) = stack.pop() {
        seen += 1;
        for &t in &adj[f] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                stack.push(t);
            }
        }
    }
    if seen != m {
        return Err("fragment graph has a cycle".into());
    }
    Ok(Partition {
        nodes,
        fragment,
        n_fragments: m,
        gate_fragment,
        gate_nodes,
        cut_nodes,
        sizes,
        roles,
    })
}

/// Gaps that can change the fragment structure: on each qubit, the gap right
/// after each two-qubit gate that is followed by another two-qubit gate on
/// that qubit. Single-qubit gates between them may sit on either side
/// without changing fragment sizes or cut roles, so the earliest gap stands
/// for the whole class.
pub(crate) fn candidate_cuts(circuit: &Circuit) -> Vec<CutPoint> {
    let mut out = Vec::new();
    for q in 0..circuit.n_qubits {
        let two: Vec<usize> = circuit
            .gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.qubits.len() == 2 && g.acts_on(q))
            .map(|(i, _)| i)
            .collect();
        for w in two.windows(2) {
            out.push(CutPoint::new(q, w[0]));
        }
    }
    out.sort();
    out
}

/// Natural log of the predicted cost of a partition with no merges and
/// noiseless workers.
pub(crate) fn predicted_log_cost(part: &Partition, n_cuts: usize, shots: u64) -> f64 {
    let entities: Vec<cost::CostEntity> = (0..part.n_fragments)
        .map(|f| cost::CostEntity {
            sq: part.sizes[f],
            eps: 0.0,
            n_shots: cost::shots_for_roles(shots, part.roles[f]),
            merged: false,
        })
        .collect();
    cost::log_seme(2 * n_cuts, 0, &entities, 1.0).expect("noiseless cost is finite")
}

/// Find cut points so that every fragment fits the largest capacity minus
/// `reserve_per_cut`. Fewest cuts first, then lowest predicted cost, then the
/// lexicographically smallest cut list.
pub fn find_cuts(circuit: &Circuit, capacities: &[usize], reserve_per_cut: usize) -> Result<CutPlan> {
    find_cuts_budgeted(circuit, capacities, reserve_per_cut, DEFAULT_SEARCH_BUDGET)
}

pub fn find_cuts_budgeted(
    circuit: &Circuit,
    capacities: &[usize],
    reserve_per_cut: usize,
    budget: u64,
) -> Result<CutPlan> {
    circuit.validate()?;
    if circuit.gates.is_empty() {
        return Err(Error::EmptyCircuit);
    }
    let max_cap = capacities.iter().copied().max().unwrap_or(0);
    if max_cap < 2 {
        return Err(Error::InvalidParams(format!(
            "largest worker capacity is {max_cap}, need at least 2"
        )));
    }
    if circuit.n_qubits <= max_cap {
        return Ok(CutPlan {
            cuts: Vec::new(),
            subcircuit_count: 1,
            greedy: false,
        });
    }
    let limit = max_cap.saturating_sub(reserve_per_cut);
    let needs = if circuit.gates.iter().any(|g| g.qubits.len() == 2) { 2 } else { 1 };
    if limit < needs {
        return Err(Error::Infeasible(format!(
            "a two-qubit gate needs 2 qubits but fragments are limited to {limit}"
        )));
    }
    let circuit = circuit.with_implicit_measurements();
    let candidates = candidate_cuts(&circuit);

    if circuit.n_qubits <= EXHAUSTIVE_MAX_QUBITS {
        if let Some(plan) = exhaustive(&circuit, &candidates, limit, budget)? {
            return Ok(plan);
        }
    }
    greedy(&circuit, &candidates, limit)
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// `Ok(None)` when the budget runs out before a feasible plan is found.
fn exhaustive(circuit: &Circuit, candidates: &[CutPoint], limit: usize, budget: u64) -> Result<Option<CutPlan>> {
    let mut spent = 0u64;
    for k in 0..=candidates.len() {
        let combos = binomial(candidates.len(), k);
        spent = spent.saturating_add(combos);
        if spent > budget {
            return Ok(None);
        }
        let mut best: Option<(f64, Vec<CutPoint>, usize)> = None;
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let cuts: Vec<CutPoint> = idx.iter().map(|&i| candidates[i]).collect();
            if let Ok(part) = partition(circuit, &cuts) {
                if part.sizes.iter().all(|&s| s <= limit) {
                    let cost = predicted_log_cost(&part, k, SEARCH_SHOTS);
                    // combos arrive in lexicographic order, so only a strictly
                    // cheaper plan displaces the incumbent
                    if best.as_ref().is_none_or(|(c, _, _)| cost < c - 1e-12 * c.abs().max(1.0)) {
                        best = Some((cost, cuts, part.n_fragments));
                    }
                }
            }
            if !next_combination(&mut idx, candidates.len()) {
                break;
            }
        }
        if let Some((_, cuts, m)) = best {
            return Ok(Some(CutPlan {
                cuts,
                subcircuit_count: m,
                greedy: false,
            }));
        }
    }
    Err(Error::Infeasible(format!(
        "no cut set brings every fragment down to {limit} qubits"
    )))
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Add one cut at a time, each time taking the cut that leaves the smallest
/// largest fragment (then the most even split, then the latest position).
fn greedy(circuit: &Circuit, candidates: &[CutPoint], limit: usize) -> Result<CutPlan> {
    let mut cuts: Vec<CutPoint> = Vec::new();
    loop {
        if let Ok(part) = partition(circuit, &cuts) {
            if part.sizes.iter().all(|&s| s <= limit) {
                cuts.sort();
                return Ok(CutPlan {
                    cuts,
                    subcircuit_count: part.n_fragments,
                    greedy: true,
                });
            }
        }
        let mut best: Option<((usize, usize, CutPoint), CutPoint)> = None;
        for &c in candidates.iter().filter(|c| !cuts.contains(c)) {
            let mut trial = cuts.clone();
            trial.push(c);
            let Ok(part) = partition(circuit, &trial) else {
                continue;
            };
            let max = part.sizes.iter().copied().max().unwrap_or(0);
            let spread: usize = part.sizes.iter().map(|s| s * s).sum();
            let key = (max, spread, c);
            let better = match &best {
                None => true,
                Some((k, _)) => (key.0, key.1) < (k.0, k.1) || ((key.0, key.1) == (k.0, k.1) && key.2 > k.2),
            };
            if better {
                best = Some((key, c));
            }
        }
        match best {
            Some((_, c)) => cuts.push(c),
            None => {
                return Err(Error::Infeasible(format!(
                    "greedy search exhausted cut candidates before fragments fit {limit} qubits"
                )))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Circuit {
        let mut c = Circuit::new("chain", n, 0);
        c.h(0);
        for q in 0..n - 1 {
            c.cx(q, q + 1);
        }
        c
    }

    #[test]
    fn fits_without_cuts() {
        let plan = find_cuts(&chain(3), &[3, 3], 1).unwrap();
        assert_eq!(plan.cuts, vec![]);
        assert_eq!(plan.subcircuit_count, 1);
    }

    #[test]
    fn chain_splits_in_two() {
        // 4-qubit chain with fragments of at most 3 qubits: one cut
        let plan = find_cuts(&chain(4), &[3, 3], 0).unwrap();
        assert_eq!(plan.cuts.len(), 1);
        assert_eq!(plan.subcircuit_count, 2);
    }

    #[test]
    fn infeasible_when_capacity_too_small() {
        assert!(matches!(find_cuts(&chain(4), &[2, 2], 1), Err(Error::Infeasible(_))));
        assert!(matches!(find_cuts(&chain(4), &[1], 0), Err(Error::InvalidParams(_))));
        let empty = Circuit::new("e", 3, 0);
        assert!(matches!(find_cuts(&empty, &[2], 0), Err(Error::EmptyCircuit)));
    }

    #[test]
    fn self_loop_rejected() {
        // cutting only q0 between two CX on the same pair leaves both ends
        // of the cut in one fragment
        let mut c = Circuit::new("loop", 2, 0);
        c.cx(0, 1).cx(0, 1);
        let c = c.with_implicit_measurements();
        assert!(partition(&c, &[CutPoint::new(0, 0)]).is_err());
        assert!(partition(&c, &[CutPoint::new(0, 0), CutPoint::new(1, 0)]).is_ok());
    }

    #[test]
    fn greedy_fallback_finds_a_plan() {
        let plan = find_cuts_budgeted(&chain(6), &[3, 3], 0, 0).unwrap();
        assert!(plan.greedy);
        let c = chain(6).with_implicit_measurements();
        let part = partition(&c, &plan.cuts).unwrap();
        assert!(part.sizes.iter().all(|&s| s <= 3));
    }
}
