//! Sparse direct solver.

use faer::prelude::SpSolver;
use faer::sparse::SparseColMat;

use crate::error::{Error, Result};
use crate::linalg::sparse::SparseMatrix;

/// Sparse LU factorisation `P A Q = L U` of a square [`SparseMatrix`].
///
/// Backed by faer's supernodal LU with row partial pivoting and a
/// fill-reducing column ordering. Immutable once built, so it can be shared
/// between threads and reused for any number of solves.
pub struct SparseLu {
    n: usize,
    inner: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu").field("n", &self.n).finish()
    }
}

// relative residual above which the probe solve flags numerical singularity
const PROBE_TOL: f64 = 1e-6;

impl SparseLu {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "LU of a {}x{} matrix",
                n,
                a.n_cols()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        let mut col_used = vec![false; n];
        for i in 0..n {
            let mut any = false;
            for (j, v) in a.row(i) {
                if v != 0.0 {
                    col_used[j] = true;
                    any = true;
                }
            }
            if !any {
                return Err(Error::SingularMatrix(i));
            }
        }
        if let Some(j) = col_used.iter().position(|u| !u) {
            return Err(Error::SingularMatrix(j));
        }
        let csc = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &a.triplets())
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        // faer panics on an exact zero pivot instead of returning an error
        let factored = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| csc.sp_lu()))
            .map_err(|_| Error::SingularMatrix(n))?;
        let inner = factored.map_err(|e| match e {
            faer::sparse::linalg::LuError::SymbolicSingular(k) => Error::SingularMatrix(k),
            other => Error::Factorization(format!("{other:?}")),
        })?;
        let lu = Self { n, inner };
        lu.probe(a)?;
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Overwrites `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        self.inner.solve_in_place(faer::col::from_slice_mut(b));
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    // An exactly singular matrix can still be structurally nonsingular; faer
    // then produces inf/nan or garbage instead of an error. Solve against a
    // known right-hand side to catch that.
    fn probe(&self, a: &SparseMatrix) -> Result<()> {
        let x_ref: Vec<f64> = (0..self.n)
            .map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0)
            .collect();
        let b = a.mul_vec(&x_ref);
        let x = self.solve(&b);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix(
                x.iter().position(|v| !v.is_finite()).unwrap_or(0),
            ));
        }
        let r = a.mul_vec(&x);
        let res: f64 = r
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        if res / norm_b > PROBE_TOL {
            return Err(Error::SingularMatrix(self.n));
        }
        Ok(())
    }
}
