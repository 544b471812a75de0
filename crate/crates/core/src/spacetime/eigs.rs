//! Spectrum of the preconditioned single-step pressure Schur complement.

use num_complex::Complex64;

use super::precond::{PrecondConfig, SpaceTimePreconditioner};
use super::system::SpaceTimeSystem;
use crate::error::{Error, Result};
use crate::linalg::{dense_eigenvalues, DenseMatrix, SparseLu};

/// Eigenvalues of `M_p^{-1} F_p[k] A_p^{-1} B F_u[k]^{-1} B^T` (0-based `k`),
/// formed column by column with direct solves. For enclosed flow the zero
/// eigenvalue of the constant pressure mode is removed.
pub fn preconditioned_schur_eigs(sys: &SpaceTimeSystem, k: usize) -> Result<Vec<Complex64>> {
    let n_p = sys.n_p;
    if n_p < 2 {
        return Err(Error::InvalidArgument(format!("{n_p} pressure DOFs: nothing to analyse")));
    }
    if k >= sys.n_t {
        return Err(Error::InvalidArgument(format!("step {k} out of range")));
    }
    let step = sys.step(k, &vec![0.0; sys.n_u]);
    let precond = SpaceTimePreconditioner::new(&step, PrecondConfig::ideal())?;
    let f_lu = SparseLu::new(&sys.f_u[k])?;
    let mut a = DenseMatrix::zeros(n_p, n_p);
    let mut e = vec![0.0; n_p];
    let mut v = vec![0.0; sys.n_u];
    let mut col = vec![0.0; n_p];
    let mut out = vec![0.0; n_p];
    for j in 0..n_p {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        sys.bt.mul_vec_into(&e, &mut v);
        f_lu.solve_in_place(&mut v);
        sys.b.mul_vec_into(&v, &mut col);
        precond.apply_schur_inverse(&col, &mut out)?;
        for i in 0..n_p {
            a[(i, j)] = out[i];
        }
    }
    let mut eigs = dense_eigenvalues(&a)?;
    if sys.enclosed {
        if let Some(i) = eigs
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
            .map(|(i, _)| i)
        {
            eigs.swap_remove(i);
        }
    }
    Ok(eigs)
}
