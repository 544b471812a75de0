mod common;

use faer::complex_native::c64;
use proptest::prelude::*;
use stflow::linalg::{
    cg_solve, chebyshev_solve, dense_eigenvalues, gmres, KrylovConfig, LinearOperator, Preconditioner,
    SparseLu,
};
use stflow::spacetime::MASS_JACOBI_BOUNDS;
use stflow::{make_problem, DenseMatrix, ProblemId, Result, SparseMatrix, SpaceTimeSystem};

struct Jacobi(Vec<f64>);

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.iter_mut().zip(r).zip(&self.0).for_each(|((z, r), d)| *z = r / d);
        Ok(())
    }
}

/// Diagonally dominant nonsymmetric sparse matrix.
fn random_sparse(n: usize, seed: u64) -> SparseMatrix {
    use rand::Rng;
    let mut rng = common::rng(seed);
    let mut trip = Vec::new();
    for i in 0..n {
        trip.push((i, i, 4.0 + rng.gen_range(0.0..2.0)));
        for _ in 0..3 {
            trip.push((i, rng.gen_range(0..n), rng.gen_range(-1.0..1.0)));
        }
    }
    SparseMatrix::from_triplets(n, n, &trip).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gmres_history_and_true_residual(n in 5usize..80, seed in 0u64..1000) {
        let a = random_sparse(n, seed);
        let b = common::random_vec(&mut common::rng(seed + 1), n);
        let (x, rep) = gmres(&a, &b, None, &KrylovConfig::new(1e-10, 200), None).unwrap();
        prop_assert!(rep.converged);
        prop_assert!(rep.residual_history.windows(2).all(|w| w[1] <= w[0]));
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let true_res = common::norm(&r) / common::norm(&b);
        prop_assert!((rep.final_residual - true_res).abs() <= 1e-10 * true_res.max(1.0));
        prop_assert!(true_res <= 1e-9);
    }

    #[test]
    fn flexible_equals_standard_for_fixed_preconditioner(n in 5usize..80, seed in 0u64..1000) {
        let a = random_sparse(n, seed);
        let b = common::random_vec(&mut common::rng(seed + 2), n);
        let p = Jacobi(a.diagonal());
        let cfg = KrylovConfig::new(1e-10, 200);
        let (x, rep) = gmres(&a, &b, None, &cfg, Some(&p)).unwrap();
        let (xf, repf) = gmres(&a, &b, None, &cfg.flexible(true), Some(&p)).unwrap();
        prop_assert_eq!(rep.iterations, repf.iterations);
        prop_assert!(common::rel_diff(&xf, &x) <= 1e-12);
        for (h, hf) in rep.residual_history.iter().zip(&repf.residual_history) {
            prop_assert!((h - hf).abs() <= 1e-12);
        }
    }

    #[test]
    fn sparse_lu_inverts_random_matrices(n in 2usize..120, seed in 0u64..1000) {
        let a = random_sparse(n, seed);
        let lu = SparseLu::new(&a).unwrap();
        let x = common::random_vec(&mut common::rng(seed + 3), n);
        let y = lu.solve(&a.mul_vec(&x));
        prop_assert!(common::rel_diff(&y, &x) <= 1e-12);
    }

    #[test]
    fn eigenvalues_match_faer(n in 1usize..30, seed in 0u64..1000) {
        let mut rng = common::rng(seed);
        let cols: Vec<Vec<f64>> = (0..n).map(|_| common::random_vec(&mut rng, n)).collect();
        let a = DenseMatrix::from_columns(n, &cols);
        let mut ours = dense_eigenvalues(&a).unwrap();
        let m = faer::Mat::from_fn(n, n, |i, j| cols[j][i]);
        let mut theirs: Vec<c64> = m.eigenvalues::<c64>();
        let key = |re: f64, im: f64| (re, im);
        ours.sort_by(|p, q| key(p.re, p.im).partial_cmp(&key(q.re, q.im)).unwrap());
        theirs.sort_by(|p, q| key(p.re, p.im).partial_cmp(&key(q.re, q.im)).unwrap());
        prop_assert_eq!(ours.len(), theirs.len());
        // match greedily: sort order can flip for near-equal real parts
        let mut used = vec![false; n];
        for z in &ours {
            let (j, d) = theirs
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, w)| (j, ((z.re - w.re).powi(2) + (z.im - w.im).powi(2)).sqrt()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            used[j] = true;
            prop_assert!(d <= 1e-8 * (1.0 + z.norm()), "eigenvalue {z} unmatched ({d:e})");
        }
    }
}

#[test]
fn sparse_lu_inverts_fem_matrices() {
    for id in [ProblemId::Cavity, ProblemId::BackStep] {
        let sys = SpaceTimeSystem::for_problem(&make_problem(id, None).unwrap(), 3, 2).unwrap();
        let mut rng = common::rng(7);
        for a in [sys.f_u[0].as_ref(), &sys.ops.m_p] {
            let lu = SparseLu::new(a).unwrap();
            for _ in 0..5 {
                let x = common::random_vec(&mut rng, a.n_rows());
                assert!(common::rel_diff(&lu.solve(&a.mul_vec(&x)), &x) <= 1e-12);
            }
        }
    }
}

#[test]
fn lu_and_cg_agree_on_pressure_laplacian() {
    let p = make_problem(ProblemId::Poiseuille, None).unwrap();
    let sys = SpaceTimeSystem::for_problem(&p, 4, 1).unwrap();
    let a = sys.ops.a_p_tilde.as_ref();
    assert!(a.is_symmetric(1e-14));
    let b = common::random_vec(&mut common::rng(11), a.n_rows());
    let x_lu = SparseLu::new(a).unwrap().solve(&b);
    let (x_cg, rep) = cg_solve(a, &b, &KrylovConfig::new(1e-13, 2000), Some(&a.diagonal()), false).unwrap();
    assert!(rep.converged);
    assert!(common::rel_diff(&x_cg, &x_lu) <= 1e-10);
}

#[test]
fn deflated_cg_solves_enclosed_laplacian() {
    let sys = SpaceTimeSystem::for_problem(&make_problem(ProblemId::Cavity, None).unwrap(), 3, 1).unwrap();
    let a = sys.ops.a_p_tilde.as_ref();
    let ones = vec![1.0; a.n_rows()];
    assert!(common::norm(&a.mul_vec(&ones)) < 1e-12);
    let mut b = common::random_vec(&mut common::rng(12), a.n_rows());
    let mean = b.iter().sum::<f64>() / b.len() as f64;
    b.iter_mut().for_each(|v| *v -= mean);
    let (x, rep) = cg_solve(a, &b, &KrylovConfig::new(1e-12, 2000), Some(&a.diagonal()), true).unwrap();
    assert!(rep.converged);
    assert!(common::rel_diff(&a.mul_vec(&x), &b) <= 1e-10);
    assert!(x.iter().sum::<f64>().abs() < 1e-10);
}

#[test]
fn chebyshev_converges_on_mass_matrix() {
    let sys = SpaceTimeSystem::for_problem(&make_problem(ProblemId::Cavity, None).unwrap(), 4, 1).unwrap();
    let m = &sys.ops.m_p;
    let x = common::random_vec(&mut common::rng(13), m.n_rows());
    let b = m.mul_vec(&x);
    let mut last = f64::INFINITY;
    for k in [2, 4, 8, 16] {
        let err = common::rel_diff(&chebyshev_solve(m, &b, k, MASS_JACOBI_BOUNDS, true), &x);
        assert!(err < last);
        last = err;
    }
    assert!(last < 1e-4);
}

#[test]
fn operator_trait_for_closures() {
    let op = (3usize, |x: &[f64], y: &mut [f64]| y.iter_mut().zip(x).for_each(|(y, x)| *y = 2.0 * x));
    let (x, rep) = gmres(&op, &[2.0, 4.0, 6.0], None, &KrylovConfig::new(1e-12, 10), None).unwrap();
    assert_eq!(rep.iterations, 1);
    assert!(common::rel_diff(&x, &[1.0, 2.0, 3.0]) < 1e-14);
    assert_eq!(op.dim(), 3);
}
