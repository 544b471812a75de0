//! The all-at-once implicit-Euler system in velocity-then-pressure ordering.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{assemble_load, FESpaces, SpatialOperators, Wind};
use crate::linalg::{LinearOperator, SparseMatrix};
use crate::problems::ProblemSpec;

/// `[u^1 ... u^Nt | p^1 ... p^Nt]`
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeVector {
    n_u: usize,
    n_p: usize,
    n_t: usize,
    data: Vec<f64>,
}

impl SpaceTimeVector {
    pub fn zeros(n_u: usize, n_p: usize, n_t: usize) -> Self {
        Self {
            n_u,
            n_p,
            n_t,
            data: vec![0.0; n_t * (n_u + n_p)],
        }
    }

    pub fn from_vec(n_u: usize, n_p: usize, n_t: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_t * (n_u + n_p) {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for {n_t} blocks of {n_u}+{n_p}",
                data.len()
            )));
        }
        Ok(Self { n_u, n_p, n_t, data })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn u(&self, k: usize) -> &[f64] {
        &self.data[k * self.n_u..(k + 1) * self.n_u]
    }

    pub fn u_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.n_u..(k + 1) * self.n_u]
    }

    pub fn p(&self, k: usize) -> &[f64] {
        let o = self.n_t * self.n_u;
        &self.data[o + k * self.n_p..o + (k + 1) * self.n_p]
    }

    pub fn p_mut(&mut self, k: usize) -> &mut [f64] {
        let o = self.n_t * self.n_u;
        &mut self.data[o + k * self.n_p..o + (k + 1) * self.n_p]
    }
}

/// Splits a flat space-time slice into velocity and pressure parts.
pub(crate) fn split(x: &[f64], n_u: usize, n_t: usize) -> (&[f64], &[f64]) {
    x.split_at(n_u * n_t)
}

pub(crate) fn split_mut(x: &mut [f64], n_u: usize, n_t: usize) -> (&mut [f64], &mut [f64]) {
    x.split_at_mut(n_u * n_t)
}

/// Space-time saddle-point system with velocity Dirichlet conditions
/// eliminated step by step (constrained rows and columns become identity).
#[derive(Debug, Clone)]
pub struct SpaceTimeSystem {
    pub spaces: Arc<FESpaces>,
    /// Operators before elimination.
    pub ops: SpatialOperators,
    pub n_t: usize,
    pub dt: f64,
    pub mu: f64,
    /// Time of the state preceding the first block.
    pub t0: f64,
    pub n_u: usize,
    pub n_p: usize,
    pub enclosed: bool,
    /// Eliminated diagonal velocity blocks.
    pub f_u: Vec<Arc<SparseMatrix>>,
    /// `M_u / dt` restricted to free rows and columns: the subdiagonal
    /// coupling enters with a minus sign.
    pub m_sub: Arc<SparseMatrix>,
    /// `B` with Dirichlet columns removed.
    pub b: Arc<SparseMatrix>,
    pub bt: Arc<SparseMatrix>,
    pub rhs: SpaceTimeVector,
    /// Dirichlet values per step, zero off the constrained set.
    pub dirichlet: Vec<Vec<f64>>,
}

impl SpaceTimeSystem {
    /// Meshes the problem at refinement `r` and assembles `n_t` steps.
    pub fn for_problem(problem: &ProblemSpec, r: u32, n_t: usize) -> Result<Self> {
        let spaces = Arc::new(crate::fem::build_spaces(&problem.mesh(r)));
        Self::assemble(problem, spaces, n_t)
    }

    /// Assembles the problem on `spaces` with `n_t` uniform steps over
    /// `[t0, t_end]`, using the problem's prescribed wind.
    pub fn assemble(problem: &ProblemSpec, spaces: Arc<FESpaces>, n_t: usize) -> Result<Self> {
        if n_t == 0 {
            return Err(Error::InvalidArgument("n_t must be >= 1".into()));
        }
        let dt = (problem.t_end - problem.t0) / n_t as f64;
        let wind_fns: Vec<_> = (1..=n_t)
            .map(|k| {
                let t = problem.t0 + k as f64 * dt;
                move |x: [f64; 2]| problem.wind(x, t)
            })
            .collect();
        let winds: Vec<Wind> = wind_fns
            .iter()
            .map(|f| {
                if problem.has_wind() {
                    Wind::Analytic(f)
                } else {
                    Wind::Zero
                }
            })
            .collect();
        let ops = SpatialOperators::assemble(&spaces, dt, problem.mu, &winds)?;
        Self::from_operators(problem, spaces, ops)
    }

    /// Builds the eliminated system and its right-hand side from assembled
    /// operators.
    pub fn from_operators(problem: &ProblemSpec, spaces: Arc<FESpaces>, ops: SpatialOperators) -> Result<Self> {
        let n_t = ops.n_t();
        let dt = ops.dt;
        let mask = &spaces.velocity_dirichlet;
        let (n_u, n_p) = (spaces.n_u(), spaces.n_p());

        let mut eliminated: HashMap<*const SparseMatrix, Arc<SparseMatrix>> = HashMap::new();
        let f_u: Vec<Arc<SparseMatrix>> = ops
            .f_u
            .iter()
            .map(|f| {
                eliminated
                    .entry(Arc::as_ptr(f))
                    .or_insert_with(|| Arc::new(f.with_identity_rows_cols(mask)))
                    .clone()
            })
            .collect();
        let m_over_dt = ops.m_u.scaled(1.0 / dt);
        let m_sub = Arc::new(m_over_dt.without_rows_cols(Some(mask), Some(mask)));
        let b = Arc::new(ops.b.without_rows_cols(None, Some(mask)));
        let bt = Arc::new(b.transpose());

        let mut rhs = SpaceTimeVector::zeros(n_u, n_p, n_t);
        let mut dirichlet = Vec::with_capacity(n_t);
        let has_neumann = !spaces.neumann_edges.is_empty();
        let mut g_prev = vec![0.0; n_u];
        for k in 0..n_t {
            let t = problem.t0 + (k + 1) as f64 * dt;
            let g = spaces.dirichlet_values(|x| problem.dirichlet(x, t));
            let neumann = |x: [f64; 2]| problem.neumann(x, t);
            let load = assemble_load(
                &spaces,
                |x| problem.forcing(x, t),
                has_neumann.then_some(&neumann as &dyn Fn([f64; 2]) -> [f64; 2]),
            );
            let fg = ops.f_u[k].mul_vec(&g);
            let mg = m_over_dt.mul_vec(&g_prev);
            let ru = rhs.u_mut(k);
            for i in 0..n_u {
                ru[i] = if mask[i] { g[i] } else { load[i] - fg[i] + mg[i] };
            }
            let bg = ops.b.mul_vec(&g);
            rhs.p_mut(k).iter_mut().zip(&bg).for_each(|(r, v)| *r = -v);
            g_prev.clone_from(&g);
            dirichlet.push(g);
        }

        Ok(Self {
            enclosed: spaces.enclosed(),
            spaces,
            ops,
            n_t,
            dt,
            mu: problem.mu,
            t0: problem.t0,
            n_u,
            n_p,
            f_u,
            m_sub,
            b,
            bt,
            rhs,
            dirichlet,
        })
    }

    pub fn dim(&self) -> usize {
        self.n_t * (self.n_u + self.n_p)
    }

    /// Zero vector carrying the Dirichlet values of every step.
    pub fn initial_guess(&self) -> SpaceTimeVector {
        let mut x = SpaceTimeVector::zeros(self.n_u, self.n_p, self.n_t);
        for k in 0..self.n_t {
            x.u_mut(k).copy_from_slice(&self.dirichlet[k]);
        }
        x
    }

    pub fn velocity_mask(&self) -> &[bool] {
        &self.spaces.velocity_dirichlet
    }

    /// Single-step system for step `k`, with the previous velocity moved to
    /// the right-hand side. Shares all matrices with `self`.
    pub fn step(&self, k: usize, u_prev: &[f64]) -> SpaceTimeSystem {
        assert!(k < self.n_t);
        let mut ops = self.ops.clone();
        ops.w_u = vec![self.ops.w_u[k].clone()];
        ops.w_p = vec![self.ops.w_p[k].clone()];
        ops.f_u = vec![self.ops.f_u[k].clone()];
        ops.f_p = vec![self.ops.f_p[k].clone()];
        let mut rhs = SpaceTimeVector::zeros(self.n_u, self.n_p, 1);
        rhs.u_mut(0).copy_from_slice(self.rhs.u(k));
        if k > 0 {
            self.m_sub.mul_vec_add(1.0, u_prev, rhs.u_mut(0));
        }
        rhs.p_mut(0).copy_from_slice(self.rhs.p(k));
        SpaceTimeSystem {
            spaces: self.spaces.clone(),
            ops,
            n_t: 1,
            dt: self.dt,
            mu: self.mu,
            t0: self.t0 + k as f64 * self.dt,
            n_u: self.n_u,
            n_p: self.n_p,
            enclosed: self.enclosed,
            f_u: vec![self.f_u[k].clone()],
            m_sub: self.m_sub.clone(),
            b: self.b.clone(),
            bt: self.bt.clone(),
            rhs,
            dirichlet: vec![self.dirichlet[k].clone()],
        }
    }

    /// `b - A x`
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.dim()];
        apply_spacetime_operator(self, x, &mut r);
        r.iter_mut()
            .zip(self.rhs.as_slice())
            .for_each(|(ri, bi)| *ri = bi - *ri);
        r
    }

    /// `||b - A x|| / ||b||` (or the absolute norm when `b = 0`).
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let r = crate::linalg::norm2(&self.residual(x));
        let nb = crate::linalg::norm2(self.rhs.as_slice());
        if nb == 0.0 {
            r
        } else {
            r / nb
        }
    }
}

/// `y_u[k] = F_u[k] x_u[k] - (M_u/dt) x_u[k-1] + B^T x_p[k]`,
/// `y_p[k] = B x_u[k]`.
pub fn apply_spacetime_operator(sys: &SpaceTimeSystem, x: &[f64], y: &mut [f64]) {
    let (n_u, n_p, n_t) = (sys.n_u, sys.n_p, sys.n_t);
    assert_eq!(x.len(), sys.dim());
    assert_eq!(y.len(), sys.dim());
    let (xu, xp) = split(x, n_u, n_t);
    let (yu, yp) = split_mut(y, n_u, n_t);
    for k in 0..n_t {
        let xu_k = &xu[k * n_u..(k + 1) * n_u];
        let xp_k = &xp[k * n_p..(k + 1) * n_p];
        let yu_k = &mut yu[k * n_u..(k + 1) * n_u];
        sys.f_u[k].mul_vec_into(xu_k, yu_k);
        if k > 0 {
            sys.m_sub.mul_vec_add(-1.0, &xu[(k - 1) * n_u..k * n_u], yu_k);
        }
        sys.bt.mul_vec_add(1.0, xp_k, yu_k);
        sys.b.mul_vec_into(xu_k, &mut yp[k * n_p..(k + 1) * n_p]);
    }
}

impl LinearOperator for SpaceTimeSystem {
    fn dim(&self) -> usize {
        SpaceTimeSystem::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        apply_spacetime_operator(self, x, y)
    }
}
