//! Sequential vs rayon execution of a reduced verification sweep.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vpl_core::exec::Execution;
use vpl_core::sweep::{run_sweep, SweepConfig};

fn config() -> SweepConfig {
    SweepConfig {
        n_max: 3,
        p_values: vec![1, 2, 3],
        order_per_p: 12,
        degmax: 2,
        ..SweepConfig::default()
    }
}

fn sweep(c: &mut Criterion) {
    let cfg = config();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, exec) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                let report = run_sweep(&cfg, exec);
                assert!(report.pass);
                report.cells
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
