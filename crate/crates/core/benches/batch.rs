use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hetflow_core::homothety::{linspace, sweep, HomothetyCase};
use hetflow_core::par::Execution;
use hetflow_core::verify::{run_suite, SuiteConfig};
use std::hint::black_box;

const EXECUTORS: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn identity_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("identities");
    group.sample_size(10);
    for (name, exec) in EXECUTORS {
        let cfg = SuiteConfig { seed: 0, trials: 64, exec };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| black_box(run_suite("identities", cfg).unwrap()))
        });
    }
    group.finish();
}

fn regime_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    let kappas = linspace(0.0, 1.0, 41);
    let mus = linspace(0.0, 2.0, 41);
    for (name, exec) in EXECUTORS {
        for cross in [false, true] {
            let id = BenchmarkId::new(name, if cross { "cross-check" } else { "roots" });
            group.bench_function(id, |b| b.iter(|| black_box(sweep(HomothetyCase::Positive, &kappas, &mus, cross, exec).unwrap())));
        }
    }
    group.finish();
}

criterion_group!(benches, identity_batch, regime_sweep);
criterion_main!(benches);
