//! Linear algebra kernels: sparse and dense matrices, direct and Krylov
//! solvers, Chebyshev semi-iteration and a dense nonsymmetric eigensolver.

pub mod chebyshev;
pub mod dense;
pub mod eigen;
pub mod krylov;
pub mod lu;
pub mod sparse;

pub use chebyshev::chebyshev_solve;
pub use dense::{DenseLu, DenseMatrix};
pub use eigen::dense_eigenvalues;
pub use krylov::{cg_solve, gmres, KrylovConfig, SolveReport};
pub use lu::SparseLu;
pub use sparse::SparseMatrix;

use crate::error::Result;

/// Square linear map acting on `f64` vectors, possibly matrix-free.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Approximate inverse applied as a right preconditioner.
///
/// Implementations may be iterative (and therefore vary from call to call);
/// GMRES must then run in flexible mode.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()>;
}

impl<F> LinearOperator for (usize, F)
where
    F: Fn(&[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.1)(x, y)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Removes the mean so the vector is orthogonal to the constants.
pub fn remove_mean(x: &mut [f64]) {
    if x.is_empty() {
        return;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}
