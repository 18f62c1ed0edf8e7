use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use critnls_core::dynamics::{picard_solve, NonlinearitySpec, SolverConfig};
use critnls_core::norms::{norm_value, NormKind, NormSettings};
use critnls_core::spectral::{fourier_forward, propagate, radial_transform, Direction};
use critnls_core::verify::data::{gaussian, scale_to_w};
use critnls_core::{Grid, GridMode, GridSpec, Trajectory};

fn tensor(points: usize) -> Grid {
    Grid::new(GridSpec { dim: 3, mode: GridMode::FullTensor, extent: 16.0, points }).unwrap()
}

fn radial(dim: usize, points: usize) -> Grid {
    Grid::new(GridSpec { dim, mode: GridMode::Radial, extent: 32.0, points }).unwrap()
}

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("transform");
    for points in [32, 64] {
        let f = gaussian(&tensor(points), 1.5).unwrap();
        g.bench_with_input(BenchmarkId::new("fft-3d", points), &f, |b, f| b.iter(|| fourier_forward(black_box(f)).unwrap()));
    }
    for (dim, points) in [(3, 512), (7, 512), (8, 512)] {
        let f = gaussian(&radial(dim, points), 1.0).unwrap();
        g.bench_with_input(BenchmarkId::new(format!("radial-n{dim}"), points), &f, |b, f| {
            b.iter(|| radial_transform(black_box(f), Direction::Forward).unwrap())
        });
    }
    g.finish();
}

fn propagator(c: &mut Criterion) {
    let f = gaussian(&tensor(64), 1.5).unwrap();
    c.bench_function("propagate 64^3", |b| b.iter(|| propagate(black_box(&f), 0.1)));
}

fn norms(c: &mut Criterion) {
    let mut g = c.benchmark_group("norm");
    g.sample_size(20);
    let u = Trajectory::free_evolution(&gaussian(&radial(7, 512), 1.0).unwrap(), 0.0, 0.25, 16).unwrap();
    let settings = NormSettings::default();
    for (name, kind) in [("W", NormKind::W), ("X", NormKind::X), ("Y", NormKind::Y)] {
        g.bench_function(name, |b| b.iter(|| norm_value(black_box(&u), &kind, &settings).unwrap()));
    }
    g.finish();
}

fn picard(c: &mut Criterion) {
    let mut g = c.benchmark_group("picard");
    g.sample_size(10);
    for dim in [3, 4] {
        let grid = Grid::new(GridSpec { dim, mode: GridMode::Radial, extent: 24.0, points: 256 }).unwrap();
        let u0 = scale_to_w(&gaussian(&grid, 1.0).unwrap(), 0.05, 0.5, 64).unwrap();
        let spec = NonlinearitySpec::defocusing(dim).unwrap();
        let cfg = SolverConfig::default();
        g.bench_function(format!("radial n={dim} 64 steps"), |b| b.iter(|| picard_solve(black_box(&u0), (0.0, 0.5), &spec, &cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, transforms, propagator, norms, picard);
criterion_main!(benches);
