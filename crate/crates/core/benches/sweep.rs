//! Trial throughput of one sweep point on the sequential executor and on
//! the rayon pool. Build with `--no-default-features` to see the pool
//! collapse to the sequential loop.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use lmn_core::decoder::MatchMode;
use lmn_core::montecarlo::run_point;
use lmn_core::parallel::Executor;
use lmn_core::{Lattice, LatticeKind, LatticeSpec};

const TRIALS: usize = 256;

fn executors() -> Vec<(&'static str, Executor)> {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    vec![("sequential", Executor::sequential()), ("parallel", Executor::new(cores.max(2)))]
}

fn sweep_point(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_point");
    group.sample_size(10);
    group.throughput(Throughput::Elements(TRIALS as u64));
    for (kind, n, eps) in [
        (LatticeKind::SquareTorus, 16, 0.10),
        (LatticeKind::SquareTorus, 32, 0.10),
        (LatticeKind::TriangularTorus, 16, 0.16),
        (LatticeKind::SquarePlanar, 16, 0.10),
    ] {
        let lattice = Lattice::new(LatticeSpec::new(kind, n)).unwrap();
        for (name, executor) in executors() {
            group.bench_with_input(BenchmarkId::new(name, format!("{kind}/N{n}/eps{eps}")), &eps, |b, &eps| {
                b.iter(|| run_point(&lattice, eps, TRIALS, 1, &executor, MatchMode::Exact).unwrap())
            });
        }
    }
    group.finish();
}

fn matching_modes(c: &mut Criterion) {
    let lattice = Lattice::new(LatticeSpec::new(LatticeKind::SquareTorus, 32)).unwrap();
    let executor = Executor::sequential();
    let mut group = c.benchmark_group("matching_mode");
    group.sample_size(10);
    for (name, mode) in [("exact", MatchMode::Exact), ("pruned6", MatchMode::Pruned { k: 6 })] {
        group.bench_function(name, |b| b.iter(|| run_point(&lattice, 0.10, 64, 1, &executor, mode).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, sweep_point, matching_modes);
criterion_main!(benches);
