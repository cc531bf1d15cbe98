//! End-to-end runs: plan, schedule, execute every variant on its worker's
//! noise, reconstruct, score. Also the random-merge baseline and sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{bitstring, Census, Circuit, Distribution};
use crate::config::{EChoice, Mode, SystemConfig};
use crate::cost::{self, CostReport};
use crate::cutter::{extract_subcircuits, physical_variants, CutPlan, CutPoint, SubcircuitSpec};
use crate::epr::{self, pair_feasible, EprPlan, MergePlan, Unit};
use crate::error::{Error, Result, Stage};
use crate::par;
use crate::reconstruct::{attribute, reconstruct};
use crate::scheduler::{self, Assignment, Placement};
use crate::sim::{derive_seed, run_variant, simulate_exact, ExecMode, DEFAULT_EXACT_CAP};

pub const SCHEMA: &str = "qcut-epr/1";
pub const DEFAULT_TOP_K: usize = 16;

const RANDOM_STREAM: u64 = 0x7261_6e64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Entries of the final distribution kept in the report.
    pub top_k: usize,
    /// Include every variant's outcome distribution.
    pub dump_counts: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            top_k: DEFAULT_TOP_K,
            dump_counts: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitDigest {
    pub name: String,
    pub n_qubits: usize,
    pub n_clbits: usize,
    pub n_gates: usize,
    pub census: Census,
}

impl CircuitDigest {
    pub fn of(c: &Circuit) -> Self {
        CircuitDigest {
            name: c.name.clone(),
            n_qubits: c.n_qubits,
            n_clbits: c.n_clbits,
            n_gates: c.gates.len(),
            census: c.census(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecSummary {
    pub id: usize,
    pub qubits: usize,
    pub outputs: Vec<usize>,
    pub upstream_cuts: Vec<CutPoint>,
    pub downstream_cuts: Vec<CutPoint>,
    pub census: Census,
}

impl SpecSummary {
    pub fn of(s: &SubcircuitSpec) -> Self {
        SpecSummary {
            id: s.id,
            qubits: s.sq(),
            outputs: s.output_map.clone(),
            upstream_cuts: s.upstream_cuts.iter().map(|r| r.cut).collect(),
            downstream_cuts: s.downstream_cuts.iter().map(|r| r.cut).collect(),
            census: s.census(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitSummary {
    pub id: usize,
    /// Original subcircuit ids this unit executes.
    pub subcircuits: Vec<usize>,
    pub qubits: usize,
    pub consumed_cuts: Vec<CutPoint>,
    pub assignment: Assignment,
    pub workers: Vec<String>,
    /// Variants in the four-basis accounting.
    pub logical_variants: usize,
    /// Variants actually executed (I shares the Z run).
    pub executed_variants: usize,
    pub error_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSummary {
    pub top: Vec<(String, f64)>,
    pub top_mass: f64,
    pub negativity_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomBaseline {
    pub e: usize,
    pub seed: u64,
    pub seme: f64,
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Baselines {
    /// Same cuts, no merges, scheduled the same way.
    pub no_epr: CostReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomBaseline>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantDump {
    pub label: String,
    pub probs: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub kind: &'static str,
    pub circuit: CircuitDigest,
    pub mode: Mode,
    pub shots: u64,
    pub seed: u64,
    pub cut_plan: CutPlan,
    pub subcircuits: Vec<SpecSummary>,
    pub merge_plan: MergePlan,
    pub placement: Placement,
    pub units: Vec<UnitSummary>,
    pub cost: CostReport,
    /// Hellinger fidelity against the noiseless full simulation.
    pub fidelity: Option<f64>,
    pub ground_truth: bool,
    pub output: OutputSummary,
    pub baseline: Baselines,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<Vec<VariantDump>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    /// Full reconstructed distribution over the circuit's output bits.
    #[serde(skip)]
    pub distribution: Distribution,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn exec_mode(system: &SystemConfig) -> ExecMode {
    match system.mode {
        Mode::Exact => ExecMode::Exact,
        Mode::Sampled => ExecMode::Sampled { shots: system.shots },
    }
}

/// Cost of the same cut with no merges, scheduled the same way.
pub fn no_epr_cost(plan: &EprPlan, system: &SystemConfig) -> Result<CostReport> {
    let base = epr::plan_with_e(&plan.cut_plan, &plan.specs, 0, system)?;
    let placement = scheduler::schedule(&base.units, system)?;
    scheduler::cost_report(&base, &placement, system)
}

fn summarize_unit(id: usize, unit: &Unit, a: Assignment, system: &SystemConfig) -> UnitSummary {
    let (subcircuits, consumed_cuts) = match unit {
        Unit::Single(s) => (vec![s.id], vec![]),
        Unit::Merged(m) => (vec![m.pair.0, m.pair.1], m.consumed.clone()),
    };
    let spec = unit.spec();
    let u = spec.upstream_cuts.len();
    let d = spec.downstream_cuts.len();
    UnitSummary {
        id,
        subcircuits,
        qubits: spec.sq(),
        consumed_cuts,
        assignment: a,
        workers: a.workers().iter().map(|&w| system.workers[w].name.clone()).collect(),
        logical_variants: 1 << (2 * (u + d)),
        executed_variants: 3usize.pow(u as u32) << (2 * d),
        error_rate: scheduler::combined_error_rate(unit, a, system),
    }
}

pub fn summarize_units(plan: &EprPlan, placement: &Placement, system: &SystemConfig) -> Vec<UnitSummary> {
    plan.units
        .iter()
        .zip(&placement.assignments)
        .enumerate()
        .map(|(i, (u, &a))| summarize_unit(i, u, a, system))
        .collect()
}

fn notes(circuit: &Circuit, plan: &EprPlan) -> Vec<String> {
    let mut out = Vec::new();
    let lower = circuit.name.to_ascii_lowercase();
    if lower.starts_with("hwea") || lower.starts_with("supremacy") {
        out.push("workload construction is a documented stand-in".to_string());
    }
    if plan.merge_plan.e > 0 {
        out.push("link failure is modeled as two-qubit depolarizing on the entangling gate".to_string());
    }
    if plan.merge_plan.shortfall {
        out.push(format!(
            "requested {} EPR pairs, only {} could be placed",
            plan.merge_plan.requested, plan.merge_plan.e
        ));
    }
    if plan.cut_plan.greedy {
        out.push("cuts came from the greedy fallback".to_string());
    }
    out
}

/// Run every unit's variants where the placement puts them, reconstruct and
/// score. Shared by the optimized pipeline and the random baseline.
fn execute(
    circuit: &Circuit,
    system: &SystemConfig,
    plan: EprPlan,
    placement: Placement,
    kind: &'static str,
    opts: RunOptions,
    started: Instant,
) -> Result<Report> {
    let mode = exec_mode(system);
    let mut all_terms = Vec::with_capacity(plan.units.len());
    let mut dumps = Vec::new();
    for (i, (unit, &a)) in plan.units.iter().zip(&placement.assignments).enumerate() {
        let spec = unit.spec();
        let noise = scheduler::unit_noise(unit, a, system);
        let variants = physical_variants(spec);
        let results = par::map_range(variants.len(), |v| {
            run_variant(spec, &variants[v], &noise, mode, derive_seed(system.seed, &[i as u64, v as u64]))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at(Stage::Execute))?;
        if opts.dump_counts {
            let n_bits = spec.n_outputs() + spec.upstream_cuts.len();
            dumps.push(
                variants
                    .iter()
                    .zip(&results)
                    .map(|(v, r)| VariantDump {
                        label: v.label(),
                        probs: r
                            .probs
                            .iter()
                            .enumerate()
                            .filter(|(_, &p)| p != 0.0)
                            .map(|(k, &p)| (bitstring(k, n_bits), p))
                            .collect(),
                    })
                    .collect(),
            );
        }
        all_terms.push(attribute(spec, &results).map_err(|e| e.at(Stage::Reconstruct))?);
    }
    let n_out = circuit.n_output_bits();
    let rec = reconstruct(&all_terms, n_out).map_err(|e| e.at(Stage::Reconstruct))?;

    let metrics = |e: Error| e.at(Stage::Metrics);
    let no_epr = no_epr_cost(&plan, system).map_err(metrics)?;
    let cost = scheduler::cost_report(&plan, &placement, system)
        .map_err(metrics)?
        .with_baseline(&no_epr);
    let ground_truth = circuit.n_qubits <= DEFAULT_EXACT_CAP;
    let fidelity = if ground_truth {
        let truth = simulate_exact(circuit).map_err(metrics)?;
        Some(cost::fidelity(&truth, &rec.distribution).map_err(metrics)?)
    } else {
        None
    };
    let top = rec.distribution.top_k(opts.top_k);
    let output = OutputSummary {
        top_mass: top.iter().map(|(_, p)| p).sum(),
        top,
        negativity_mass: rec.negativity_mass,
    };
    Ok(Report {
        schema: SCHEMA,
        kind,
        circuit: CircuitDigest::of(circuit),
        mode: system.mode,
        shots: system.shots,
        seed: system.seed,
        subcircuits: plan.specs.iter().map(SpecSummary::of).collect(),
        units: summarize_units(&plan, &placement, system),
        notes: notes(circuit, &plan),
        cut_plan: plan.cut_plan,
        merge_plan: plan.merge_plan,
        placement,
        cost,
        fidelity,
        ground_truth,
        output,
        baseline: Baselines { no_epr, random: None },
        counts: opts.dump_counts.then_some(dumps),
        wall_time_ms: system.timing.then(|| started.elapsed().as_secs_f64() * 1e3),
        distribution: rec.distribution,
    })
}

pub fn run_pipeline(circuit: &Circuit, system: &SystemConfig) -> Result<Report> {
    run_pipeline_with(circuit, system, RunOptions::default())
}

pub fn run_pipeline_with(circuit: &Circuit, system: &SystemConfig, opts: RunOptions) -> Result<Report> {
    run_inner(circuit, system, None, opts)
}

/// The pipeline with the cut search skipped in favour of `cut_plan`.
pub fn run_with_cuts(circuit: &Circuit, system: &SystemConfig, cut_plan: &CutPlan, opts: RunOptions) -> Result<Report> {
    run_inner(circuit, system, Some(cut_plan), opts)
}

fn run_inner(circuit: &Circuit, system: &SystemConfig, cuts: Option<&CutPlan>, opts: RunOptions) -> Result<Report> {
    let started = Instant::now();
    system.validate()?;
    circuit.validate()?;
    let plan = match cuts {
        None => epr::plan(circuit, system),
        Some(cp) => {
            extract_subcircuits(circuit, cp).and_then(|specs| epr::plan_from_cuts(cp, &specs, system))
        }
    }
    .map_err(|e| e.at(Stage::Plan))?;
    let placement = scheduler::schedule(&plan.units, system).map_err(|e| e.at(Stage::Schedule))?;
    let e = plan.merge_plan.e;
    let mut report = execute(circuit, system, plan, placement, "optimized", opts, started)?;
    if system.compare_random {
        let seed = derive_seed(system.seed, &[RANDOM_STREAM]);
        let r = baseline_random_with(circuit, system, e, seed, RunOptions::default())?;
        report.baseline.random = Some(RandomBaseline {
            e: r.merge_plan.e,
            seed,
            seme: r.cost.seme,
            fidelity: r.fidelity,
        });
    }
    Ok(report)
}

/// Draws before the random merge settles for the largest spend it has seen.
const MERGE_DRAWS: usize = 64;

/// Random merges spending up to `x` EPR pairs: adjacent pairs are shuffled
/// and taken greedily under the same feasibility rules as the optimized
/// selection. A draw that strands pairs and spends less than it could is
/// redrawn, so the baseline pays for as many links as the optimized run.
pub fn random_pairs(specs: &[SubcircuitSpec], x: usize, capacities: &[usize], rng: &mut ChaCha8Rng) -> MergePlan {
    let mut candidates = Vec::new();
    for i in 0..specs.len() {
        for j in i + 1..specs.len() {
            let feasible = epr::merge_demand(&specs[i], &specs[j]).is_some_and(|d| pair_feasible(d, capacities));
            if feasible {
                candidates.push((i, j));
            }
        }
    }
    let mut best: Option<MergePlan> = None;
    for _ in 0..MERGE_DRAWS {
        candidates.shuffle(rng);
        let mut used = vec![false; specs.len()];
        let mut pairs = Vec::new();
        let mut spent = 0;
        for &(i, j) in &candidates {
            let links = specs[i].shared_cuts(&specs[j]).len();
            if used[i] || used[j] || spent + links > x {
                continue;
            }
            used[i] = true;
            used[j] = true;
            spent += links;
            pairs.push((specs[i].id, specs[j].id));
        }
        pairs.sort_unstable();
        let draw = MergePlan {
            pairs,
            e: spent,
            requested: x,
            shortfall: spent < x,
        };
        if !draw.shortfall {
            return draw;
        }
        if best.as_ref().is_none_or(|b| draw.e > b.e) {
            best = Some(draw);
        }
    }
    best.expect("at least one draw")
}

/// A uniformly random feasible placement. Concurrent when any concurrent
/// packing exists (retrying a bounded number of times before settling for
/// the first-fit packing), otherwise each unit independently.
pub fn random_placement(units: &[Unit], system: &SystemConfig, rng: &mut ChaCha8Rng) -> Result<Placement> {
    let options: Vec<Vec<Assignment>> = units
        .iter()
        .map(|u| scheduler::feasible_assignments(u, &system.workers))
        .collect();
    if let Some(i) = options.iter().position(|o| o.is_empty()) {
        return Err(Error::Infeasible(format!("unit {i} fits no worker")));
    }
    if !scheduler::concurrent_possible(units, &system.workers) {
        return Ok(Placement {
            assignments: options.iter().map(|o| o[rng.gen_range(0..o.len())]).collect(),
            concurrent: false,
        });
    }
    let caps = system.capacities();
    'attempt: for _ in 0..64 {
        let mut load = vec![0usize; caps.len()];
        let mut assignments = Vec::with_capacity(units.len());
        for (u, opts) in units.iter().zip(&options) {
            let fitting: Vec<Assignment> = opts
                .iter()
                .copied()
                .filter(|&a| scheduler::fits(&load, &caps, u, a))
                .collect();
            let Some(&a) = fitting.choose(rng) else {
                continue 'attempt;
            };
            scheduler::charge(&mut load, u, a);
            assignments.push(a);
        }
        return Ok(Placement {
            assignments,
            concurrent: true,
        });
    }
    scheduler::first_fit_placement(units, &system.workers)
        .ok_or_else(|| Error::Infeasible("no concurrent packing found".into()))
}

pub fn baseline_random(circuit: &Circuit, system: &SystemConfig, x: usize, seed: u64) -> Result<Report> {
    baseline_random_with(circuit, system, x, seed, RunOptions::default())
}

pub fn baseline_random_with(
    circuit: &Circuit,
    system: &SystemConfig,
    x: usize,
    seed: u64,
    opts: RunOptions,
) -> Result<Report> {
    let started = Instant::now();
    system.validate()?;
    circuit.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = (|| {
        let (cut_plan, specs) = epr::cut(circuit, system)?;
        let merge_plan = random_pairs(&specs, x, &system.capacities(), &mut rng);
        let units = epr::build_units(&specs, &merge_plan)?;
        Ok(EprPlan {
            cut_plan,
            specs,
            merge_plan,
            units,
        })
    })()
    .map_err(|e: Error| e.at(Stage::Plan))?;
    let placement = random_placement(&plan.units, system, &mut rng).map_err(|e| e.at(Stage::Schedule))?;
    execute(circuit, system, plan, placement, "random", opts, started)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    E(Vec<usize>),
    SuccessRate(Vec<f64>),
    Workers(Vec<usize>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::E(_) => "e",
            SweepAxis::SuccessRate(_) => "sr",
            SweepAxis::Workers(_) => "workers",
        }
    }

    fn len(&self) -> usize {
        match self {
            SweepAxis::E(v) | SweepAxis::Workers(v) => v.len(),
            SweepAxis::SuccessRate(v) => v.len(),
        }
    }
}

/// Configuration for sweep point `i`. Growing the fleet cycles through the
/// configured workers; a fleet of `k` gets at most `k - 2` EPR pairs.
pub fn sweep_config(system: &SystemConfig, axis: &SweepAxis, i: usize) -> Result<SystemConfig> {
    let mut cfg = system.clone();
    match axis {
        SweepAxis::E(v) => {
            cfg.e = EChoice::Fixed(v[i]);
            cfg.epr.budget = cfg.epr.budget.max(v[i]);
        }
        SweepAxis::SuccessRate(v) => cfg.epr.success_rate = v[i],
        SweepAxis::Workers(v) => {
            let k = v[i];
            let n = system.workers.len();
            if n == 0 {
                return Err(Error::Config("at least one worker is required".into()));
            }
            cfg.workers = (0..k)
                .map(|j| {
                    let mut w = system.workers[j % n].clone();
                    if j >= n {
                        w.name = format!("{}-{}", w.name, j / n);
                    }
                    w
                })
                .collect();
            let budget = system.epr.budget.min(k.saturating_sub(2));
            cfg.epr.budget = budget;
            if let EChoice::Fixed(e) = cfg.e {
                cfg.e = EChoice::Fixed(e.min(budget));
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub point: usize,
    pub e: Option<usize>,
    pub success_rate: f64,
    pub workers: usize,
    pub seme: Option<f64>,
    pub seme_pct: Option<f64>,
    pub fidelity: Option<f64>,
    pub negativity_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<Report>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub schema: &'static str,
    pub axis: &'static str,
    pub points: Vec<SweepPoint>,
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

impl Sweep {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("point,e,SR,workers,seme,seme_pct,fidelity,negativity_mass\n");
        for p in &self.points {
            let e = p.e.map(|e| e.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{e},{},{},{},{},{},{}",
                p.point,
                p.success_rate,
                p.workers,
                cell(p.seme),
                cell(p.seme_pct),
                cell(p.fidelity),
                cell(p.negativity_mass)
            );
        }
        out
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let header = ["point", "e", "SR", "workers", "seme", "seme_pct", "fidelity", "neg_mass", "error"];
        let fmt = |x: Option<f64>, prec: usize| x.map(|v| format!("{v:.prec$e}")).unwrap_or("-".into());
        let rows: Vec<Vec<String>> = self
            .points
            .iter()
            .map(|p| {
                vec![
                    p.point.to_string(),
                    p.e.map(|e| e.to_string()).unwrap_or("-".into()),
                    format!("{}", p.success_rate),
                    p.workers.to_string(),
                    fmt(p.seme, 3),
                    fmt(p.seme_pct, 3),
                    p.fidelity.map(|v| format!("{v:.6}")).unwrap_or("-".into()),
                    fmt(p.negativity_mass, 2),
                    p.error.clone().unwrap_or_default(),
                ]
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap())
            .collect();
        let line = |cells: Vec<&str>| {
            let s: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            s.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(header.to_vec());
        for r in &rows {
            out += &line(r.iter().map(String::as_str).collect());
        }
        out
    }
}

/// One pipeline run per axis value. A failing point is recorded with its
/// stage-tagged error and the sweep moves on; invalid axis values are
/// rejected up front.
pub fn sweep(circuit: &Circuit, system: &SystemConfig, axis: &SweepAxis) -> Result<Sweep> {
    let configs = (0..axis.len())
        .map(|i| sweep_config(system, axis, i))
        .collect::<Result<Vec<_>>>()?;
    let points = par::map_slice(&configs, |cfg| run_pipeline(circuit, cfg));
    Ok(Sweep {
        schema: SCHEMA,
        axis: axis.name(),
        points: points
            .into_iter()
            .zip(&configs)
            .enumerate()
            .map(|(i, (r, cfg))| match r {
                Ok(r) => SweepPoint {
                    point: i,
                    e: Some(r.merge_plan.e),
                    success_rate: cfg.epr.success_rate,
                    workers: cfg.workers.len(),
                    seme: Some(r.cost.seme),
                    seme_pct: r.cost.seme_pct_of_baseline,
                    fidelity: r.fidelity,
                    negativity_mass: Some(r.output.negativity_mass),
                    error: None,
                    report: Some(r),
                },
                Err(err) => SweepPoint {
                    point: i,
                    e: None,
                    success_rate: cfg.epr.success_rate,
                    workers: cfg.workers.len(),
                    seme: None,
                    seme_pct: None,
                    fidelity: None,
                    negativity_mass: None,
                    error: Some(err.to_string()),
                    report: None,
                },
            })
            .collect(),
    })
}
