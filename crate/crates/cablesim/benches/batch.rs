//! Seeded-batch throughput: rayon fan-out (the default `parallel`
//! feature) against a plain sequential loop over the same seeds.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cablesim::config::ScenarioConfig;
use cablesim::sim::{run, run_batch, ControllerKind, RunOptions};

fn bench_batch(c: &mut Criterion) {
    let cfg = ScenarioConfig::default();
    let opts = RunOptions::new(ControllerKind::Proposed);
    let mut group = c.benchmark_group("seeded_batch");
    group.sample_size(10);
    for n in [4usize, 16] {
        let seeds: Vec<u64> = (0..n as u64).collect();
        group.bench_with_input(BenchmarkId::new("data_parallel", n), &seeds, |b, seeds| {
            b.iter(|| {
                let logs = run_batch(&cfg, seeds, &opts);
                assert!(logs.iter().all(|l| l.is_ok()));
            });
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &seeds, |b, seeds| {
            b.iter(|| {
                for seed in seeds {
                    let mut c = cfg.clone();
                    c.rng_seed = *seed;
                    run(&c, &opts).unwrap();
                }
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_batch);
criterion_main!(benches);
