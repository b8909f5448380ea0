use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use crobs_core::geometry::deformed_structure;
use crobs_core::grid::{GridAlgebra, GridSpec};
use crobs_core::harmonic::basis_vector_by_projection;
use crobs_core::jet::{Jet, JetAlgebra};
use crobs_core::linear::{self, unit_basis};
use crobs_core::random;
use crobs_core::solvers::{self, SolveConfig};
use crobs_core::verify;
use crobs_core::{GaussianRational, PolyFn};

fn basis(c: &mut Criterion) {
    c.bench_function("basis H(5,3), cached", |b| {
        b.iter(|| crobs_core::harmonic::harmonic_basis(black_box(5), black_box(3)))
    });
    c.bench_function("basis by projection (5,3,1)", |b| {
        b.iter(|| basis_vector_by_projection(5, 3, black_box(1)))
    });
}

fn pipeline(c: &mut Criterion) {
    let phi = verify::random_deformation(&mut random::rng(7), 4);
    let alg = JetAlgebra::<GaussianRational>::new(2);
    let jet = Jet::from_coeffs(2, vec![PolyFn::zero(), phi.to_poly()]);
    c.bench_function("jet structure K=2 deg 4", |b| {
        b.iter(|| deformed_structure(&alg, black_box(&jet)).unwrap())
    });

    let galg = GridAlgebra::new(GridSpec::for_bandwidth(24));
    let g = galg
        .from_field(&phi.to_c64().scale(&Complex64::new(1e-2, 0.0)))
        .unwrap();
    c.bench_function("grid structure L=24", |b| {
        b.iter(|| deformed_structure(&galg, black_box(&g)).unwrap())
    });
}

fn linear_theory(c: &mut Criterion) {
    let u = linear::dbe_prime_basis(10);
    c.bench_function("DO on D'_BE basis N=10", |b| {
        b.iter(|| {
            u.iter()
                .map(|v| linear::do_apply(black_box(v)))
                .collect::<Vec<_>>()
        })
    });
    c.bench_function("bound scans p<=50", |b| {
        b.iter(|| verify::bounds(black_box(50)))
    });
}

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("solver");
    g.sample_size(10);
    let cfg = SolveConfig::default();
    let phi = unit_basis(8, 2, 0, 1)
        .to_c64()
        .scale(&Complex64::new(1e-2, 0.0));
    g.bench_function("grid solve eps e(2,0,1)", |b| {
        b.iter(|| solvers::partial_solve_grid(&phi, &cfg, None).unwrap())
    });
    g.finish();
}

criterion_group!(benches, basis, pipeline, linear_theory, solver);
criterion_main!(benches);
