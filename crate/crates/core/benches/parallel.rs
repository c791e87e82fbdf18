//! Sequential vs rayon execution of the data-parallel loops.
//!
//! Build with `--no-default-features` to confirm the fallback path: the
//! `parallel` series then matches `sequential`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mmdf::generator::sample_network;
use mmdf::harness::{run_simulation, Profile, SimulationDesign, Sweep, SweepParameter};
use mmdf::modularity::{estimate_k_with, ScanOptions};
use mmdf::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_simulation");
    group.sample_size(10);
    for (name, execution) in MODES {
        let mut config = SimulationDesign::Bernoulli.experiment(Profile::Ci, 1);
        config.replications = Some(4);
        config.sweep = Some(Sweep { parameter: SweepParameter::Rho, values: vec![0.3, 0.6, 0.9] });
        config.execution = execution;
        group.bench_with_input(BenchmarkId::new("bernoulli_n200", name), &config, |b, cfg| {
            b.iter(|| run_simulation(cfg).unwrap())
        });
    }
    group.finish();
}

fn k_scan(c: &mut Criterion) {
    let config = SimulationDesign::Normal.experiment(Profile::Ci, 5);
    let spec = mmdf::GeneratorSpec::from_config(config.generator.as_ref().unwrap()).unwrap().with_rho(20.0).unwrap();
    let graph = sample_network(&spec).unwrap().graph;
    let mut group = c.benchmark_group("estimate_k");
    group.sample_size(10);
    for (name, execution) in MODES {
        let opts = ScanOptions { k_max: Some(12), execution, ..ScanOptions::default() };
        group.bench_with_input(BenchmarkId::new("normal_n200_kmax12", name), &opts, |b, opts| {
            b.iter(|| estimate_k_with(&graph, opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, simulation, k_scan);
criterion_main!(benches);
