use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stflow::fem::{build_spaces, SpatialOperators, Wind};
use stflow::linalg::{gmres, KrylovConfig, LinearOperator, Preconditioner, SparseLu};
use stflow::spacetime::{PrecondConfig, SpaceTimePreconditioner};
use stflow::unit_square_mesh;
use stflow_bench::{cavity_system, ramp};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assembly");
    for r in [3u32, 4, 5] {
        let spaces = Arc::new(build_spaces(&unit_square_mesh(r)));
        let wind = |x: [f64; 2]| [x[1] - 0.5, 0.5 - x[0]];
        g.bench_with_input(BenchmarkId::new("operators", r), &r, |b, _| {
            b.iter(|| SpatialOperators::assemble(&spaces, 0.125, 1.0, &[Wind::Analytic(&wind)]).unwrap())
        });
    }
    g.finish();
}

fn sparse_lu(c: &mut Criterion) {
    let mut g = c.benchmark_group("sparse_lu");
    for r in [3u32, 4, 5] {
        let sys = cavity_system(r, 1);
        let f = sys.f_u[0].clone();
        g.bench_with_input(BenchmarkId::new("factor", r), &r, |b, _| b.iter(|| SparseLu::new(&f).unwrap()));
        let lu = SparseLu::new(&f).unwrap();
        let rhs = ramp(f.n_rows());
        g.bench_with_input(BenchmarkId::new("solve", r), &r, |b, _| {
            b.iter(|| {
                let mut x = rhs.clone();
                lu.solve_in_place(&mut x);
                black_box(x)
            })
        });
    }
    g.finish();
}

fn preconditioner(c: &mut Criterion) {
    let mut g = c.benchmark_group("apply_pt_inverse");
    for (name, cfg) in [("ideal", PrecondConfig::ideal()), ("approx", PrecondConfig::approximate())] {
        let sys = cavity_system(4, 8);
        let pre = SpaceTimePreconditioner::new(&sys, cfg).unwrap();
        let r = ramp(sys.dim());
        let mut z = vec![0.0; sys.dim()];
        g.bench_function(name, |b| b.iter(|| pre.apply(black_box(&r), &mut z).unwrap()));
    }
    g.finish();
}

fn operator_and_solve(c: &mut Criterion) {
    let sys = cavity_system(3, 8);
    let x = ramp(sys.dim());
    let mut y = vec![0.0; sys.dim()];
    c.bench_function("spacetime_matvec", |b| b.iter(|| sys.apply(black_box(&x), &mut y)));
    let pre = SpaceTimePreconditioner::new(&sys, PrecondConfig::ideal()).unwrap();
    let cfg = KrylovConfig::new(1e-10, 100);
    c.bench_function("gmres_all_at_once", |b| {
        b.iter(|| gmres(&sys, sys.rhs.as_slice(), None, &cfg, Some(&pre)).unwrap())
    });
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(10);
    targets = assembly, sparse_lu, preconditioner, operator_and_solve
}
criterion_main!(kernels);
