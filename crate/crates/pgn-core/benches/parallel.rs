//! Parallel-vs-sequential comparison of the data-parallel kernels: the
//! log-minima trace and the occupation profile. With the default `parallel`
//! feature the public entry points fan out over rayon; the `_sequential`
//! variants always run single-threaded, so the two series expose the
//! speedup directly.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use pgn_core::lattice::Lattice;
use pgn_core::minima::DEFAULT_BUDGET;
use pgn_core::singular::{geometric_partial_quotients, theta_from_partial_quotients};
use pgn_core::trace::{
    log_minima_trace, log_minima_trace_sequential, occupation_fraction,
    occupation_fraction_sequential, time_grid,
};
use pgn_core::Dims;

fn golden_lattice() -> Lattice {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    Lattice::from_theta(Dims::new(1, 1).unwrap(), &[phi]).unwrap()
}

fn bench_trace(c: &mut Criterion) {
    let x = golden_lattice();
    let grid = time_grid(20.0, 0.05).unwrap();
    let mut group = c.benchmark_group("log_minima_trace");
    group.sample_size(10);
    group.bench_function("parallel_default", |b| {
        b.iter(|| log_minima_trace(black_box(&x), black_box(&grid), DEFAULT_BUDGET).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            log_minima_trace_sequential(black_box(&x), black_box(&grid), DEFAULT_BUDGET).unwrap()
        })
    });
    group.finish();
}

fn bench_occupation(c: &mut Criterion) {
    let theta = theta_from_partial_quotients(&geometric_partial_quotients(40)).unwrap();
    let x = Lattice::from_theta(Dims::new(1, 1).unwrap(), &[theta]).unwrap();
    let mut group = c.benchmark_group("occupation_fraction");
    group.sample_size(10);
    group.bench_function("parallel_default", |b| {
        b.iter(|| occupation_fraction(black_box(&x), 20.0, -2.0, 0.05).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| occupation_fraction_sequential(black_box(&x), 20.0, -2.0, 0.05).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_trace, bench_occupation);
criterion_main!(benches);
