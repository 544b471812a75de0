//! GMRES (plain and flexible, right-preconditioned) and conjugate gradients.

use serde::{Deserialize, Serialize};

use super::{axpy, dot, norm2, remove_mean, LinearOperator, Preconditioner};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrylovConfig {
    /// Target for `||b - A x|| / ||b||`.
    pub tol: f64,
    pub max_iter: usize,
    /// Keep the preconditioned basis so the preconditioner may change
    /// between iterations (FGMRES). Ignored by CG.
    pub flexible: bool,
}

impl KrylovConfig {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            flexible: false,
        }
    }

    pub fn flexible(mut self, flexible: bool) -> Self {
        self.flexible = flexible;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {} <= 0", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual norms, starting with the initial residual.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Recomputed `||b - A x|| / ||b||` of the returned iterate.
    pub final_residual: f64,
    /// The Krylov space became invariant before the tolerance was reached.
    pub breakdown: bool,
}

struct Givens {
    c: f64,
    s: f64,
}

impl Givens {
    fn new(a: f64, b: f64) -> Self {
        if b == 0.0 {
            Self { c: 1.0, s: 0.0 }
        } else {
            let r = a.hypot(b);
            Self { c: a / r, s: b / r }
        }
    }

    fn apply(&self, a: &mut f64, b: &mut f64) {
        let (x, y) = (*a, *b);
        *a = self.c * x + self.s * y;
        *b = -self.s * x + self.c * y;
    }
}

/// Right-preconditioned GMRES without restarts.
///
/// Orthogonalisation is modified Gram-Schmidt with one full
/// reorthogonalisation pass. In flexible mode the preconditioned directions
/// are stored, so `precond` may be an inner iterative solver.
pub fn gmres(
    a: &dyn LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    config: &KrylovConfig,
    precond: Option<&dyn Preconditioner>,
) -> Result<(Vec<f64>, SolveReport)> {
    config.validate()?;
    let n = a.dim();
    if b.len() != n || x0.is_some_and(|x| x.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {n}, rhs {}",
            b.len()
        )));
    }
    let norm_b = norm2(b);
    if norm_b == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveReport {
                iterations: 0,
                residual_history: vec![0.0],
                converged: true,
                final_residual: 0.0,
                breakdown: false,
            },
        ));
    }

    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = vec![0.0; n];
    a.apply(&x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let beta = norm2(&r);
    let mut history = vec![beta / norm_b];
    if beta / norm_b <= config.tol {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                residual_history: history,
                converged: true,
                final_residual: beta / norm_b,
                breakdown: false,
            },
        ));
    }

    let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
    let mut precond_basis: Vec<Vec<f64>> = Vec::new();
    // Hessenberg columns, already rotated into upper-triangular form
    let mut hess: Vec<Vec<f64>> = Vec::new();
    let mut rotations: Vec<Givens> = Vec::new();
    let mut g = vec![beta];
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut converged = false;
    let mut breakdown = false;

    for j in 0..config.max_iter {
        match precond {
            Some(p) => p.apply(&basis[j], &mut z)?,
            None => z.copy_from_slice(&basis[j]),
        }
        a.apply(&z, &mut w);
        if config.flexible {
            precond_basis.push(z.clone());
        }
        let norm_w0 = norm2(&w);

        let mut h = vec![0.0; j + 2];
        for _pass in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                axpy(-hij, v, &mut w);
                h[i] += hij;
            }
        }
        let h_next = norm2(&w);
        h[j + 1] = h_next;

        for (i, rot) in rotations.iter().enumerate() {
            let (lo, hi) = h.split_at_mut(i + 1);
            rot.apply(&mut lo[i], &mut hi[0]);
        }
        if norm_w0 == 0.0 || h[j].hypot(h[j + 1]) <= 1e-14 * norm_w0 {
            breakdown = true;
            break;
        }
        let rot = Givens::new(h[j], h[j + 1]);
        {
            let (lo, hi) = h.split_at_mut(j + 1);
            rot.apply(&mut lo[j], &mut hi[0]);
        }
        g.push(0.0);
        {
            let (lo, hi) = g.split_at_mut(j + 1);
            rot.apply(&mut lo[j], &mut hi[0]);
        }
        rotations.push(rot);
        hess.push(h);

        let rel = g[j + 1].abs() / norm_b;
        history.push(rel);
        if rel <= config.tol {
            converged = true;
            break;
        }
        if h_next <= 1e-14 * norm_w0.max(f64::MIN_POSITIVE) {
            breakdown = true;
            break;
        }
        basis.push(w.iter().map(|v| v / h_next).collect());
    }

    let k = hess.len();
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for (l, yl) in y.iter().enumerate().skip(i + 1) {
            s -= hess[l][i] * yl;
        }
        y[i] = if hess[i][i].abs() > f64::MIN_POSITIVE { s / hess[i][i] } else { 0.0 };
    }
    if config.flexible {
        for (yi, zi) in y.iter().zip(&precond_basis) {
            axpy(*yi, zi, &mut x);
        }
    } else {
        let mut u = vec![0.0; n];
        for (yi, vi) in y.iter().zip(&basis) {
            axpy(*yi, vi, &mut u);
        }
        match precond {
            Some(p) => {
                p.apply(&u, &mut z)?;
                axpy(1.0, &z, &mut x);
            }
            None => axpy(1.0, &u, &mut x),
        }
    }

    a.apply(&x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let final_residual = norm2(&r) / norm_b;
    Ok((
        x,
        SolveReport {
            iterations: k,
            residual_history: history,
            converged,
            final_residual,
            breakdown,
        },
    ))
}

/// Preconditioned conjugate gradients from a zero initial guess.
///
/// `diag` enables Jacobi preconditioning. With `deflate_constants` the
/// right-hand side, residuals and result are kept orthogonal to the constant
/// vector, which solves a consistent pure-Neumann problem in the range of `A`.
pub fn cg_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    config: &KrylovConfig,
    diag: Option<&[f64]>,
    deflate_constants: bool,
) -> Result<(Vec<f64>, SolveReport)> {
    config.validate()?;
    let n = a.dim();
    if b.len() != n || diag.is_some_and(|d| d.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {n}, rhs {}",
            b.len()
        )));
    }
    let mut r = b.to_vec();
    if deflate_constants {
        remove_mean(&mut r);
    }
    let norm_b = norm2(&r);
    let mut x = vec![0.0; n];
    if norm_b == 0.0 {
        return Ok((
            x,
            SolveReport {
                converged: true,
                residual_history: vec![0.0],
                ..Default::default()
            },
        ));
    }
    let precondition = |r: &[f64], z: &mut [f64]| match diag {
        Some(d) => z.iter_mut().zip(r).zip(d).for_each(|((zi, ri), di)| *zi = ri / di),
        None => z.copy_from_slice(r),
    };
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    if deflate_constants {
        remove_mean(&mut z);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut history = vec![1.0];
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=config.max_iter {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if deflate_constants {
            remove_mean(&mut r);
        }
        iterations = it;
        let rel = norm2(&r) / norm_b;
        history.push(rel);
        if rel <= config.tol {
            converged = true;
            break;
        }
        precondition(&r, &mut z);
        if deflate_constants {
            remove_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    if deflate_constants {
        remove_mean(&mut x);
    }
    let final_residual = *history.last().unwrap_or(&1.0);
    Ok((
        x,
        SolveReport {
            iterations,
            residual_history: history,
            converged,
            final_residual,
            breakdown: false,
        },
    ))
}
