use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use ma_core::dirichlet::{solve_dirichlet, DirichletProblem};
use ma_core::measures::{realize, MeasureSpec};
use ma_core::{ma_measure, mixed_ma_measure, ConvexDomain, ConvexFn, Mesh};

fn disk(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::grid(&ConvexDomain::unit_ball(2), n).unwrap())
}

fn line(n: usize) -> Arc<Mesh> {
    Arc::new(Mesh::line(&ConvexDomain::interval(-1.0, 1.0).unwrap(), n).unwrap())
}

fn measures(c: &mut Criterion) {
    let mesh = disk(33);
    let u = ConvexFn::from_fn(mesh.clone(), |x| 0.5 * (x[0] * x[0] + x[1] * x[1] - 1.0)).unwrap();
    let v = ConvexFn::from_fn(mesh.clone(), |x| (x[0] * x[0] + x[1] * x[1]).sqrt() - 1.0).unwrap();
    c.bench_function("ma_measure grid 33", |b| b.iter(|| ma_measure(black_box(&u)).unwrap()));
    c.bench_function("mixed_ma_measure grid 33", |b| {
        b.iter(|| mixed_ma_measure(black_box(&[u.clone(), v.clone()])).unwrap())
    });
}

fn solvers(c: &mut Criterion) {
    let mesh = line(2001);
    let problem = DirichletProblem::new(realize(&MeasureSpec::hardy(1.5), &mesh).unwrap());
    c.bench_function("solve_dirichlet line 2001", |b| {
        b.iter(|| solve_dirichlet(black_box(&problem), 1e-12).unwrap())
    });
    let mesh = disk(17);
    let problem = DirichletProblem::new(realize(&MeasureSpec::Lebesgue, &mesh).unwrap());
    let mut group = c.benchmark_group("op2d");
    group.sample_size(10);
    group.bench_function("solve_dirichlet grid 17", |b| {
        b.iter(|| solve_dirichlet(black_box(&problem), 1e-10).unwrap())
    });
    group.finish();
}

criterion_group!(benches, measures, solvers);
criterion_main!(benches);
