use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ncsolve_bench::CORPUS;
use ncsolve_core::{solve, BoundsProfile, SolverConfig};

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10).measurement_time(Duration::from_secs(5));
    let profiles = [("scaled_0.2", BoundsProfile::Scaled(0.2)), ("paper", BoundsProfile::Paper)];
    for named in CORPUS {
        let inst = named.instance();
        for (label, profile) in profiles {
            // the probe would answer most of these before the pipeline runs
            let cfg = SolverConfig { profile, probe_len: None, ..SolverConfig::default() };
            group.bench_with_input(BenchmarkId::new(label, named.name), &inst, |b, inst| {
                b.iter(|| solve(inst, &cfg).expect("solver succeeds"))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
