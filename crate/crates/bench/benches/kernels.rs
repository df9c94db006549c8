use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use modspace::modnorm::build_windows;
use modspace::solver::{evolve_strang, picard_solve, Method};
use modspace::{modulation_norm, GridSpec, NormSpec, SolveConfig, TransitionProfile};
use modspace_bench::{hartree_problem, packet};

fn fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft_roundtrip");
    for (d, n, l) in [(1, 8192, 1024.0), (2, 256, 16.0), (3, 64, 8.0)] {
        let grid = GridSpec::new(d, n, l).unwrap();
        let f = packet(grid, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(format!("d{d}_n{n}")), &f, |b, f| {
            b.iter(|| black_box(f.to_frequency().to_physical()))
        });
    }
    group.finish();
}

fn norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("modulation_norm");
    for (d, n, l) in [(1, 512, 16.0), (2, 128, 8.0)] {
        let grid = GridSpec::new(d, n, l).unwrap();
        let ws = build_windows(&grid, TransitionProfile::Smooth).unwrap();
        let f = packet(grid, 1.0);
        let spec = NormSpec::new(4.0, 1.0, 0.5).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("d{d}_n{n}")), &f, |b, f| {
            b.iter(|| black_box(modulation_norm(f, &spec, &ws).unwrap()))
        });
    }
    group.finish();
}

fn solvers(c: &mut Criterion) {
    let grid = GridSpec::new(1, 1024, 64.0).unwrap();
    let eq = hartree_problem(grid);
    let cfg = |method| SolveConfig { horizon: 0.5, dt: 0.05, method, ..SolveConfig::default() };
    let mut group = c.benchmark_group("solve_10_steps");
    group.sample_size(20);
    group.bench_function("strang", |b| b.iter(|| black_box(evolve_strang(&eq, &cfg(Method::Strang)).unwrap())));
    group.bench_function("picard", |b| b.iter(|| black_box(picard_solve(&eq, &cfg(Method::Picard)).unwrap())));
    group.finish();
}

criterion_group!(benches, fft, norms, solvers);
criterion_main!(benches);
