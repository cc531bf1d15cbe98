mod common;

use qcut::circuit::{generate_workload, WorkloadKind, WorkloadParams};
use qcut::config::{EChoice, SystemConfig};
use qcut::cost;
use qcut::pipeline::{run_pipeline, sweep, SweepAxis};

fn hwea(n: usize) -> qcut::circuit::Circuit {
    generate_workload(WorkloadKind::Hwea, n, &WorkloadParams::Hwea { layers: 1 }, 5).unwrap()
}

fn system() -> SystemConfig {
    let mut s = SystemConfig::uniform(4, 4, 0.001, 0.01, 2, 0.95);
    s.seed = 3;
    s
}

#[test]
fn cost_section_agrees_with_its_own_entities() {
    let r = run_pipeline(&hwea(8), &system()).unwrap();
    let c = &r.cost;
    assert_eq!(c.k, 2 * r.cut_plan.cuts.len());
    assert_eq!(c.e, r.merge_plan.e);
    assert_eq!(c.entities.len(), r.units.len());
    assert_eq!(r.placement.assignments.len(), r.units.len());
    assert_eq!(r.subcircuits.len(), r.cut_plan.subcircuit_count);
    let seme = cost::seme(c.k, c.e, &c.entities, c.success_rate).unwrap();
    assert!((seme - c.seme).abs() <= 1e-9 * seme);
    assert!((c.log_seme - seme.ln()).abs() < 1e-9);
    let product: f64 = c.terms.iter().product();
    assert!((product - c.epr_overhead).abs() <= 1e-9 * product);
    let pct = c.seme_pct_of_baseline.unwrap();
    assert!((pct - 100.0 * c.seme / r.baseline.no_epr.seme).abs() <= 1e-9 * pct);
    assert!(r.fidelity.unwrap() > 0.0 && r.fidelity.unwrap() <= 1.0 + 1e-12);
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["schema"], "qcut-epr/1");
    assert_eq!(v["units"].as_array().unwrap().len(), r.units.len());
}

#[test]
fn merged_units_account_for_every_subcircuit() {
    let mut sys = system();
    sys.e = EChoice::Fixed(2);
    let r = run_pipeline(&hwea(8), &sys).unwrap();
    let mut covered: Vec<usize> = r.units.iter().flat_map(|u| u.subcircuits.clone()).collect();
    covered.sort_unstable();
    assert_eq!(covered, (0..r.subcircuits.len()).collect::<Vec<_>>());
    let consumed: usize = r.units.iter().map(|u| u.consumed_cuts.len()).sum();
    assert_eq!(consumed, r.merge_plan.e);
}

#[test]
fn e_sweep_trades_cost_for_fidelity() {
    let sw = sweep(&hwea(10), &system(), &SweepAxis::E(vec![0, 1, 2])).unwrap();
    let seme: Vec<f64> = sw.points.iter().map(|p| p.seme.unwrap()).collect();
    assert!(seme.windows(2).all(|w| w[1] < w[0]), "{seme:?}");
    let fid: Vec<f64> = sw.points.iter().map(|p| p.fidelity.unwrap()).collect();
    assert!(fid.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{fid:?}");
}

#[test]
fn thread_count_does_not_change_the_report() {
    let mut sys = system();
    sys.mode = qcut::config::Mode::Sampled;
    sys.shots = 300;
    let c = hwea(8);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_pipeline(&c, &sys).unwrap().to_json())
    };
    assert_eq!(run(1), run(4));
}
