//! One rayon thread against the default pool on the two hot loops: variant
//! execution inside a pipeline run, and trajectory sampling.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qcut::circuit::{generate_workload, WorkloadKind, WorkloadParams};
use qcut::config::{Mode, SystemConfig};
use qcut::pipeline::run_pipeline;
use qcut::sim::{sample_counts, NoiseModel, QubitNoise};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    vec![
        ("1-thread", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("default", rayon::ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn pipeline(c: &mut Criterion) {
    let circuit = generate_workload(WorkloadKind::Hwea, 10, &WorkloadParams::Hwea { layers: 1 }, 1).unwrap();
    let mut sys = SystemConfig::uniform(3, 5, 0.001, 0.01, 1, 0.95);
    sys.mode = Mode::Sampled;
    sys.shots = 400;
    let mut group = c.benchmark_group("pipeline_hwea10_sampled");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(run_pipeline(&circuit, &sys).unwrap())))
        });
    }
    group.finish();
}

fn trajectories(c: &mut Criterion) {
    let circuit = generate_workload(WorkloadKind::Hwea, 12, &WorkloadParams::Hwea { layers: 2 }, 2).unwrap();
    let noise = QubitNoise::uniform(&NoiseModel::new(0.001, 0.01, 0.0).unwrap(), 12);
    let mut group = c.benchmark_group("trajectories_hwea12");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(sample_counts(&circuit, &noise, 2000, 9, 26).unwrap())))
        });
    }
    group.finish();
}

criterion_group!(benches, pipeline, trajectories);
criterion_main!(benches);
