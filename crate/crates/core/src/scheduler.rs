//! Noise-aware placement of units onto workers.
//!
//! When every unit can be resident at once, a worker's qubits are shared by
//! the units placed on it. When no such packing exists, units run one after
//! another and each only has to fit its worker on its own.

use serde::{Deserialize, Serialize};

use crate::circuit::Census;
use crate::config::{SystemConfig, WorkerConfig};
use crate::cost::{self, CostEntity, CostReport};
use crate::epr::{EprPlan, Unit};
use crate::error::{Error, Result};
use crate::sim::{NoiseModel, QubitNoise};

/// Error rates are capped just below 1/2, where the overhead factor diverges.
pub const EPS_CAP: f64 = 0.499999;

/// Brute force refuses more units or workers than this.
pub const BRUTE_FORCE_LIMIT: usize = 6;

/// `1 - (1-p1)^p (1-p2)^q`, capped at [`EPS_CAP`].
pub fn error_rate(census: Census, p1: f64, p2: f64) -> f64 {
    let survive = (1.0 - p1).powi(census.p as i32) * (1.0 - p2).powi(census.q as i32);
    (1.0 - survive).clamp(0.0, EPS_CAP)
}

pub fn error_rate_on(census: Census, worker: &WorkerConfig) -> f64 {
    error_rate(census, worker.p1, worker.p2)
}

/// Link success rate over `distance_km` of fibre losing `alpha_db_per_km`.
pub fn success_rate_from_distance(alpha_db_per_km: f64, distance_km: f64) -> f64 {
    (-alpha_db_per_km * std::f64::consts::LN_10 / 10.0 * distance_km).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    Single(usize),
    Pair { upstream: usize, downstream: usize },
}

impl Assignment {
    pub fn workers(&self) -> Vec<usize> {
        match *self {
            Assignment::Single(w) => vec![w],
            Assignment::Pair { upstream, downstream } => vec![upstream, downstream],
        }
    }
}

/// Unit index to worker (or worker pair for merged units).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub assignments: Vec<Assignment>,
    /// All units resident at once, sharing worker capacity.
    pub concurrent: bool,
}

/// Qubits an assignment takes on each worker it touches.
pub(crate) fn demand(unit: &Unit, a: Assignment) -> Vec<(usize, usize)> {
    match (unit, a) {
        (Unit::Single(s), Assignment::Single(w)) => vec![(w, s.sq())],
        (Unit::Merged(m), Assignment::Pair { upstream, downstream }) => {
            let d = m.side_demand();
            vec![(upstream, d[0]), (downstream, d[1])]
        }
        _ => panic!("assignment kind does not match unit kind"),
    }
}

pub(crate) fn fits(load: &[usize], caps: &[usize], unit: &Unit, a: Assignment) -> bool {
    demand(unit, a).iter().all(|&(w, q)| load[w] + q <= caps[w])
}

pub(crate) fn charge(load: &mut [usize], unit: &Unit, a: Assignment) {
    for (w, q) in demand(unit, a) {
        load[w] += q;
    }
}

/// First-fit packing, largest unit first. `Some` proves a concurrent
/// placement exists.
fn first_fit(units: &[Unit], workers: &[WorkerConfig]) -> Option<Vec<Assignment>> {
    let caps: Vec<usize> = workers.iter().map(|w| w.qubits).collect();
    let mut order: Vec<usize> = (0..units.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(units[i].spec().sq()), i));
    let mut load = vec![0usize; workers.len()];
    let mut out = vec![None; units.len()];
    for i in order {
        let a = feasible_assignments(&units[i], workers)
            .into_iter()
            .find(|&a| fits(&load, &caps, &units[i], a))?;
        charge(&mut load, &units[i], a);
        out[i] = Some(a);
    }
    Some(out.into_iter().map(Option::unwrap).collect())
}

/// Whether the units can all be resident at once.
pub fn concurrent_possible(units: &[Unit], workers: &[WorkerConfig]) -> bool {
    first_fit(units, workers).is_some()
}

/// Every assignment the unit fits, in lexicographic order.
pub fn feasible_assignments(unit: &Unit, workers: &[WorkerConfig]) -> Vec<Assignment> {
    let caps: Vec<usize> = workers.iter().map(|w| w.qubits).collect();
    match unit {
        Unit::Single(s) => (0..workers.len())
            .filter(|&w| s.sq() <= caps[w])
            .map(Assignment::Single)
            .collect(),
        Unit::Merged(m) => {
            let d = m.side_demand();
            let mut v = Vec::new();
            for a in 0..workers.len() {
                for b in 0..workers.len() {
                    if a != b && d[0] <= caps[a] && d[1] <= caps[b] {
                        v.push(Assignment::Pair {
                            upstream: a,
                            downstream: b,
                        });
                    }
                }
            }
            v
        }
    }
}

/// Cost-model view of a unit on an assignment. A merged unit is charged
/// with the larger constituent's gates on the worker hosting that side.
pub fn cost_entity(unit: &Unit, assignment: Assignment, system: &SystemConfig) -> CostEntity {
    let n_shots = cost::shots_for_roles(system.shots, unit.spec().n_roles());
    match (unit, assignment) {
        (Unit::Single(s), Assignment::Single(w)) => CostEntity {
            sq: s.sq(),
            eps: error_rate_on(s.census(), &system.workers[w]),
            n_shots,
            merged: false,
        },
        (Unit::Merged(m), Assignment::Pair { upstream, downstream }) => {
            let big = m.larger();
            let host = if big == 0 { upstream } else { downstream };
            CostEntity {
                sq: unit.cost_qubits(),
                eps: error_rate_on(m.part_census[big], &system.workers[host]),
                n_shots,
                merged: true,
            }
        }
        _ => panic!("assignment kind does not match unit kind"),
    }
}

/// Per-qubit noise for executing `unit` where `assignment` puts it.
pub fn unit_noise(unit: &Unit, assignment: Assignment, system: &SystemConfig) -> QubitNoise {
    let sr = system.epr.success_rate;
    match (unit, assignment) {
        (Unit::Single(s), Assignment::Single(w)) => {
            let mut model = system.workers[w].noise(sr);
            model.epr_failure = 0.0;
            QubitNoise::uniform(&model, s.sq())
        }
        (Unit::Merged(m), Assignment::Pair { upstream, downstream }) => {
            let models: [NoiseModel; 2] = [system.workers[upstream].noise(sr), system.workers[downstream].noise(sr)];
            QubitNoise::split(&models, &m.side, 1.0 - sr)
        }
        _ => panic!("assignment kind does not match unit kind"),
    }
}

/// Error rate of the whole unit under its per-qubit noise; a gate spanning
/// both devices takes the larger two-qubit rate.
pub fn combined_error_rate(unit: &Unit, assignment: Assignment, system: &SystemConfig) -> f64 {
    let noise = unit_noise(unit, assignment, system);
    let survive: f64 = unit
        .spec()
        .circuit
        .gates
        .iter()
        .filter(|g| g.kind.is_unitary())
        .map(|g| match g.qubits[..] {
            [q] => 1.0 - noise.single(q),
            [a, b] => 1.0 - noise.pair(a, b),
            _ => 1.0,
        })
        .product();
    (1.0 - survive).clamp(0.0, EPS_CAP)
}

fn term(unit: &Unit, a: Assignment, system: &SystemConfig) -> Result<f64> {
    cost::entity_term(&cost_entity(unit, a, system), system.epr.success_rate)
}

fn infeasible(i: usize, unit: &Unit) -> Error {
    Error::Infeasible(format!(
        "unit {i} ({} qubits) fits no worker{}",
        unit.spec().sq(),
        if unit.is_merged() { " pair" } else { "" }
    ))
}

/// The first-fit packing as a placement, when one exists.
pub fn first_fit_placement(units: &[Unit], workers: &[WorkerConfig]) -> Option<Placement> {
    first_fit(units, workers).map(|assignments| Placement {
        assignments,
        concurrent: true,
    })
}

/// Greedy placement followed by [`improve`].
pub fn schedule(units: &[Unit], system: &SystemConfig) -> Result<Placement> {
    let greedy = greedy_schedule(units, system)?;
    improve(units, greedy, system)
}

/// Heaviest unit first; each goes where its own cost term is smallest, then
/// where the whole unit sees the least noise, then to the lowest index. In
/// concurrent mode only assignments that still fit the remaining capacity
/// are considered; if that leaves a unit stranded, the first-fit packing is
/// returned instead.
pub fn greedy_schedule(units: &[Unit], system: &SystemConfig) -> Result<Placement> {
    for (i, u) in units.iter().enumerate() {
        if feasible_assignments(u, &system.workers).is_empty() {
            return Err(infeasible(i, u));
        }
    }
    let packing = first_fit(units, &system.workers);
    let concurrent = packing.is_some();
    let caps = system.capacities();
    let mut load = vec![0usize; caps.len()];
    let mut order: Vec<usize> = (0..units.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(units[i].weight()), i));
    let mut assignments = vec![None; units.len()];
    for i in order {
        let unit = &units[i];
        let mut best: Option<(f64, f64, Assignment)> = None;
        for a in feasible_assignments(unit, &system.workers) {
            if concurrent && !fits(&load, &caps, unit, a) {
                continue;
            }
            let t = term(unit, a, system)?;
            let eps = combined_error_rate(unit, a, system);
            let better = match best {
                None => true,
                Some((bt, be, _)) => t < bt || (t == bt && eps < be),
            };
            if better {
                best = Some((t, eps, a));
            }
        }
        match best {
            Some((_, _, a)) => {
                charge(&mut load, unit, a);
                assignments[i] = Some(a);
            }
            None => {
                return Ok(Placement {
                    assignments: packing.expect("stranded only in concurrent mode"),
                    concurrent,
                })
            }
        }
    }
    Ok(Placement {
        assignments: assignments.into_iter().map(Option::unwrap).collect(),
        concurrent,
    })
}

fn admissible(units: &[Unit], assignments: &[Assignment], caps: &[usize]) -> bool {
    let mut load = vec![0usize; caps.len()];
    units.iter().zip(assignments).all(|(u, &a)| {
        let ok = fits(&load, caps, u, a);
        charge(&mut load, u, a);
        ok
    })
}

/// Local search from `start`: repeatedly apply the best reassignment of one
/// unit or of two units at once. A move must lower the total overhead, or
/// keep it and lower the summed noise `-ln(1 - eps)` of the units, the same
/// order of preference the greedy pass uses per unit. The greedy pass alone
/// can hand a merged unit's cost-neutral side a quiet worker that a later
/// unit needed.
pub fn improve(units: &[Unit], start: Placement, system: &SystemConfig) -> Result<Placement> {
    let options: Vec<Vec<Assignment>> = units
        .iter()
        .map(|u| feasible_assignments(u, &system.workers))
        .collect();
    let mut terms: Vec<Vec<(f64, f64)>> = Vec::with_capacity(units.len());
    for (u, opts) in units.iter().zip(&options) {
        let mut row = Vec::with_capacity(opts.len());
        for &a in opts {
            row.push((term(u, a, system)?, -(1.0 - combined_error_rate(u, a, system)).ln()));
        }
        terms.push(row);
    }
    let caps = system.capacities();
    let mut pick: Vec<usize> = start
        .assignments
        .iter()
        .enumerate()
        .map(|(i, a)| options[i].iter().position(|o| o == a).expect("start uses feasible assignments"))
        .collect();
    let score = |pick: &[usize]| -> (f64, f64) {
        pick.iter()
            .enumerate()
            .fold((1.0, 0.0), |(t, n), (i, &k)| (t * terms[i][k].0, n + terms[i][k].1))
    };
    let valid = |pick: &[usize]| {
        !start.concurrent || {
            let a: Vec<Assignment> = pick.iter().enumerate().map(|(i, &k)| options[i][k]).collect();
            admissible(units, &a, &caps)
        }
    };
    // overhead within a relative 1e-12 counts as equal
    let better = |a: (f64, f64), b: (f64, f64)| {
        let tol = 1e-12 * b.0.abs();
        a.0 < b.0 - tol || (a.0 <= b.0 + tol && a.1 < b.1 - 1e-12)
    };
    let mut current = score(&pick);
    loop {
        let mut best: Option<((f64, f64), Vec<usize>)> = None;
        let mut consider = |cand: Vec<usize>| {
            let s = score(&cand);
            let bar = best.as_ref().map_or(current, |b| b.0);
            if better(s, bar) && (s.0 <= current.0 || better(s, current)) && valid(&cand) {
                best = Some((s, cand));
            }
        };
        for i in 0..units.len() {
            for ki in 0..options[i].len() {
                let mut cand = pick.clone();
                cand[i] = ki;
                consider(cand.clone());
                for j in i + 1..units.len() {
                    for kj in 0..options[j].len() {
                        let mut both = cand.clone();
                        both[j] = kj;
                        consider(both);
                    }
                }
            }
        }
        match best {
            Some((s, cand)) => {
                // never let ties drift the overhead upward
                current = (s.0.min(current.0), s.1);
                pick = cand;
            }
            None => break,
        }
    }
    Ok(Placement {
        assignments: pick.iter().enumerate().map(|(i, &k)| options[i][k]).collect(),
        concurrent: start.concurrent,
    })
}

/// Total overhead of a placement, groups combined as a product.
pub fn placement_overhead(units: &[Unit], placement: &Placement, system: &SystemConfig) -> Result<f64> {
    let entities: Vec<CostEntity> = units
        .iter()
        .zip(&placement.assignments)
        .map(|(u, &a)| cost_entity(u, a, system))
        .collect();
    cost::epr_overhead(&entities, system.epr.success_rate)
}

/// Exhaustive minimum of [`placement_overhead`]; among placements within a
/// relative 1e-12 of the minimum the lexicographically smallest wins.
pub fn brute_force_schedule(units: &[Unit], system: &SystemConfig) -> Result<Placement> {
    if units.len() > BRUTE_FORCE_LIMIT || system.workers.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge(format!(
            "{} units on {} workers; brute force handles at most {BRUTE_FORCE_LIMIT} of each",
            units.len(),
            system.workers.len()
        )));
    }
    let options: Vec<Vec<Assignment>> = units
        .iter()
        .map(|u| feasible_assignments(u, &system.workers))
        .collect();
    if let Some(i) = options.iter().position(|o| o.is_empty()) {
        return Err(infeasible(i, &units[i]));
    }
    let terms: Vec<Vec<f64>> = units
        .iter()
        .zip(&options)
        .map(|(u, opts)| opts.iter().map(|&a| term(u, a, system)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let concurrent = concurrent_possible(units, &system.workers);
    let caps = system.capacities();
    let mut idx = vec![0usize; units.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let admissible = !concurrent || {
            let mut load = vec![0usize; caps.len()];
            idx.iter().enumerate().all(|(u, &k)| {
                let ok = fits(&load, &caps, &units[u], options[u][k]);
                charge(&mut load, &units[u], options[u][k]);
                ok
            })
        };
        let total: f64 = idx.iter().enumerate().map(|(u, &k)| terms[u][k]).product();
        let better = admissible
            && match &best {
                None => true,
                Some((b, _)) => total < *b && (b - total) > 1e-12 * b.abs(),
            };
        if better {
            best = Some((total, idx.clone()));
        }
        // odometer, last unit fastest, so placements arrive in lex order
        let mut u = units.len();
        loop {
            if u == 0 {
                let (_, pick) = best.expect("first-fit packing is admissible");
                return Ok(Placement {
                    assignments: pick.iter().enumerate().map(|(u, &k)| options[u][k]).collect(),
                    concurrent,
                });
            }
            u -= 1;
            idx[u] += 1;
            if idx[u] < options[u].len() {
                break;
            }
            idx[u] = 0;
        }
    }
}

/// Cost evaluation of a plan under a placement.
pub fn cost_report(plan: &EprPlan, placement: &Placement, system: &SystemConfig) -> Result<CostReport> {
    let entities = plan
        .units
        .iter()
        .zip(&placement.assignments)
        .map(|(u, &a)| cost_entity(u, a, system))
        .collect();
    CostReport::evaluate(plan.k(), plan.merge_plan.e, entities, system.epr.success_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Circuit;
    use crate::cutter::SubcircuitSpec;

    fn unit_with(p: usize, q: usize, sq: usize) -> Unit {
        let mut c = Circuit::new("u", sq, 0);
        for _ in 0..q {
            c.cx(0, 1);
        }
        for _ in 0..p {
            c.h(0);
        }
        Unit::Single(SubcircuitSpec {
            id: 0,
            qubit_map: (0..sq).map(Some).collect(),
            circuit: c,
            upstream_cuts: vec![],
            downstream_cuts: vec![],
            output_map: vec![],
        })
    }

    #[test]
    fn error_rate_cases() {
        assert_eq!(error_rate(Census { p: 0, q: 0 }, 0.1, 0.1), 0.0);
        assert!((error_rate(Census { p: 0, q: 1 }, 0.0, 0.05) - 0.05).abs() < 1e-15);
        let want = 1.0 - 0.999f64.powi(4) * 0.99f64.powi(10);
        assert!((error_rate(Census { p: 4, q: 10 }, 0.001, 0.01) - want).abs() < 1e-15);
        assert!((want - 0.09923).abs() < 5e-5);
        assert_eq!(error_rate(Census { p: 0, q: 100 }, 0.0, 0.5), EPS_CAP);
    }

    #[test]
    fn distance_model() {
        assert_eq!(success_rate_from_distance(0.0, 50.0), 1.0);
        assert_eq!(success_rate_from_distance(0.2, 0.0), 1.0);
        let half = 2f64.ln() / (0.2 * std::f64::consts::LN_10 / 10.0);
        assert!((success_rate_from_distance(0.2, half) - 0.5).abs() < 1e-12);
        assert!((success_rate_from_distance(0.2, 100.0) - 0.01).abs() < 1e-4);
    }

    #[test]
    fn heavier_unit_gets_quieter_worker() {
        let units = vec![unit_with(4, 10, 3), unit_with(4, 2, 3)];
        let mut system = SystemConfig::uniform(2, 4, 0.001, 0.01, 1, 1.0);
        system.workers[1].p2 = 0.05;
        let p = schedule(&units, &system).unwrap();
        assert!(p.concurrent);
        assert_eq!(p.assignments, vec![Assignment::Single(0), Assignment::Single(1)]);
        assert_eq!(brute_force_schedule(&units, &system).unwrap(), p);

        // with room for both on w0 they share it
        system.workers[0].qubits = 6;
        let p = schedule(&units, &system).unwrap();
        assert_eq!(p.assignments, vec![Assignment::Single(0), Assignment::Single(0)]);
    }

    #[test]
    fn falls_back_to_sequential() {
        let units = vec![unit_with(1, 1, 3), unit_with(1, 1, 3), unit_with(1, 1, 3)];
        let system = SystemConfig::uniform(2, 4, 0.0, 0.01, 1, 1.0);
        let p = schedule(&units, &system).unwrap();
        assert!(!p.concurrent);
        assert_eq!(brute_force_schedule(&units, &system).unwrap(), p);
    }

    #[test]
    fn infeasible_and_empty() {
        let system = SystemConfig::uniform(2, 2, 0.0, 0.0, 1, 1.0);
        assert!(matches!(schedule(&[unit_with(0, 1, 3)], &system), Err(Error::Infeasible(_))));
        assert!(matches!(
            brute_force_schedule(&[unit_with(0, 1, 3)], &system),
            Err(Error::Infeasible(_))
        ));
        assert_eq!(brute_force_schedule(&[], &system).unwrap().assignments, vec![]);
    }
}
