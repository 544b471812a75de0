//! Block upper-triangular space-time preconditioner
//! `P_T = [F_u  B^T; 0  -X]` with `X^{-1} = M_p^{-1} F_p A_p^{-1}`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::system::{split, split_mut, SpaceTimeSystem};
use crate::error::{Error, Result};
use crate::linalg::{
    cg_solve, chebyshev_solve, gmres, remove_mean, KrylovConfig, LinearOperator, Preconditioner,
    SparseLu, SparseMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VelocitySolver {
    /// Block forward substitution with one sparse LU per distinct step matrix.
    ExactTimeStepLu,
    /// GMRES on the whole space-time velocity block, preconditioned by
    /// block Jacobi with the per-step LU factors.
    InnerKrylov { tol: f64, max_iter: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MassSolver {
    Lu,
    /// Fixed number of Jacobi-scaled Chebyshev steps on `[1/2, 2]`.
    Chebyshev(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LaplacianSolver {
    Lu,
    /// Jacobi-preconditioned CG.
    Cg { tol: f64, max_iter: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchurForm {
    General,
    /// Closed form `A_p^{-1}/dt + mu M_p^{-1}` on the diagonal and
    /// `-A_p^{-1}/dt` below; valid without pressure advection.
    StokesSimplified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecondConfig {
    pub velocity: VelocitySolver,
    pub mass: MassSolver,
    pub laplacian: LaplacianSolver,
    pub schur_form: SchurForm,
}

/// Bounds on the spectrum of the Jacobi-scaled P1 mass matrix.
pub const MASS_JACOBI_BOUNDS: (f64, f64) = (0.5, 2.0);

impl PrecondConfig {
    /// Direct solvers everywhere.
    pub fn ideal() -> Self {
        Self {
            velocity: VelocitySolver::ExactTimeStepLu,
            mass: MassSolver::Lu,
            laplacian: LaplacianSolver::Lu,
            schur_form: SchurForm::General,
        }
    }

    /// Chebyshev for the pressure mass, CG for the pressure Laplacian and a
    /// capped inner GMRES for the velocity block.
    pub fn approximate() -> Self {
        Self {
            velocity: VelocitySolver::InnerKrylov {
                tol: 1e-6,
                max_iter: 15,
            },
            mass: MassSolver::Chebyshev(8),
            laplacian: LaplacianSolver::Cg {
                tol: 1e-8,
                max_iter: 500,
            },
            schur_form: SchurForm::General,
        }
    }

    pub fn with_velocity(mut self, velocity: VelocitySolver) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn with_schur_form(mut self, form: SchurForm) -> Self {
        self.schur_form = form;
        self
    }

    /// Any component other than a direct solve: the outer method must be
    /// flexible.
    pub fn is_iterative(&self) -> bool {
        !matches!(
            (self.velocity, self.mass, self.laplacian),
            (VelocitySolver::ExactTimeStepLu, MassSolver::Lu, LaplacianSolver::Lu)
        )
    }
}

/// Factorisations and workspace for applying `P_T^{-1}`.
pub struct SpaceTimePreconditioner<'s> {
    sys: &'s SpaceTimeSystem,
    cfg: PrecondConfig,
    f_u_lu: Vec<Arc<SparseLu>>,
    m_p_lu: Option<Arc<SparseLu>>,
    /// For enclosed flow: factor of `A_p` with the first DOF pinned.
    a_p_lu: Option<Arc<SparseLu>>,
    a_p_diag: Vec<f64>,
    inner_iterations: AtomicUsize,
    #[cfg(feature = "test-hooks")]
    exact_schur: Option<crate::linalg::DenseLu>,
}

impl std::fmt::Debug for SpaceTimePreconditioner<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpaceTimePreconditioner")
            .field("cfg", &self.cfg)
            .field("distinct_velocity_factors", &self.distinct_factors())
            .finish()
    }
}

fn pinned_laplacian(a: &SparseMatrix) -> SparseMatrix {
    let mut mask = vec![false; a.n_rows()];
    mask[0] = true;
    a.with_identity_rows_cols(&mask)
}

impl<'s> SpaceTimePreconditioner<'s> {
    pub fn new(sys: &'s SpaceTimeSystem, cfg: PrecondConfig) -> Result<Self> {
        if cfg.schur_form == SchurForm::StokesSimplified
            && sys
                .ops
                .w_p
                .iter()
                .any(|w| w.values().iter().any(|&v| v != 0.0))
        {
            return Err(Error::InvalidArgument(
                "simplified Schur form requires zero pressure advection".into(),
            ));
        }
        let mut cache: HashMap<*const SparseMatrix, Arc<SparseLu>> = HashMap::new();
        let mut f_u_lu = Vec::with_capacity(sys.n_t);
        for f in &sys.f_u {
            let lu = match cache.get(&Arc::as_ptr(f)) {
                Some(lu) => lu.clone(),
                None => {
                    let lu = Arc::new(SparseLu::new(f)?);
                    cache.insert(Arc::as_ptr(f), lu.clone());
                    lu
                }
            };
            f_u_lu.push(lu);
        }
        let m_p_lu = match cfg.mass {
            MassSolver::Lu => Some(Arc::new(SparseLu::new(&sys.ops.m_p)?)),
            MassSolver::Chebyshev(_) => None,
        };
        let a_p_lu = match cfg.laplacian {
            LaplacianSolver::Lu if sys.enclosed => {
                Some(Arc::new(SparseLu::new(&pinned_laplacian(&sys.ops.a_p_tilde))?))
            }
            LaplacianSolver::Lu => Some(Arc::new(SparseLu::new(&sys.ops.a_p_tilde)?)),
            LaplacianSolver::Cg { .. } => None,
        };
        Ok(Self {
            sys,
            cfg,
            f_u_lu,
            m_p_lu,
            a_p_lu,
            a_p_diag: sys.ops.a_p_tilde.diagonal(),
            inner_iterations: AtomicUsize::new(0),
            #[cfg(feature = "test-hooks")]
            exact_schur: None,
        })
    }

    /// The preconditioner of the single-step system `step_sys = sys.step(k, ..)`,
    /// reusing this preconditioner's factorisations.
    pub fn for_step<'t>(&self, step_sys: &'t SpaceTimeSystem, k: usize) -> SpaceTimePreconditioner<'t> {
        SpaceTimePreconditioner {
            sys: step_sys,
            cfg: self.cfg,
            f_u_lu: vec![self.f_u_lu[k].clone()],
            m_p_lu: self.m_p_lu.clone(),
            a_p_lu: self.a_p_lu.clone(),
            a_p_diag: self.a_p_diag.clone(),
            inner_iterations: AtomicUsize::new(0),
            #[cfg(feature = "test-hooks")]
            exact_schur: None,
        }
    }

    pub fn config(&self) -> &PrecondConfig {
        &self.cfg
    }

    pub fn distinct_factors(&self) -> usize {
        let mut ptrs: Vec<_> = self.f_u_lu.iter().map(Arc::as_ptr).collect();
        ptrs.dedup();
        ptrs.len()
    }

    /// Inner iterations (velocity GMRES and pressure CG) since construction.
    pub fn inner_iterations(&self) -> usize {
        self.inner_iterations.load(Ordering::Relaxed)
    }

    /// `Ã_p^{-1} r`, the pseudo-inverse for enclosed flow.
    fn solve_laplacian(&self, r: &[f64]) -> Result<Vec<f64>> {
        let sys = self.sys;
        match self.cfg.laplacian {
            LaplacianSolver::Lu => {
                let lu = self.a_p_lu.as_ref().expect("factor built for LU mode");
                if sys.enclosed {
                    let mut x = r.to_vec();
                    remove_mean(&mut x);
                    x[0] = 0.0;
                    lu.solve_in_place(&mut x);
                    remove_mean(&mut x);
                    Ok(x)
                } else {
                    Ok(lu.solve(r))
                }
            }
            LaplacianSolver::Cg { tol, max_iter } => {
                let (x, rep) = cg_solve(
                    sys.ops.a_p_tilde.as_ref(),
                    r,
                    &KrylovConfig::new(tol, max_iter),
                    Some(&self.a_p_diag),
                    sys.enclosed,
                )?;
                self.inner_iterations.fetch_add(rep.iterations, Ordering::Relaxed);
                Ok(x)
            }
        }
    }

    fn solve_mass(&self, r: &[f64]) -> Vec<f64> {
        match self.cfg.mass {
            MassSolver::Lu => self.m_p_lu.as_ref().expect("factor built for LU mode").solve(r),
            MassSolver::Chebyshev(k) => chebyshev_solve(&self.sys.ops.m_p, r, k, MASS_JACOBI_BOUNDS, true),
        }
    }

    /// `X^{-1} r_p`. For enclosed flow each block is first projected onto the
    /// complement of the constants, so both Schur forms act on the same space.
    pub fn apply_schur_inverse(&self, r_p: &[f64], out: &mut [f64]) -> Result<()> {
        let sys = self.sys;
        let (n_p, n_t) = (sys.n_p, sys.n_t);
        if r_p.len() != n_p * n_t || out.len() != n_p * n_t {
            return Err(Error::DimensionMismatch("pressure space-time vector".into()));
        }
        #[cfg(feature = "test-hooks")]
        if let Some(lu) = &self.exact_schur {
            let mut r = r_p.to_vec();
            if sys.enclosed {
                r.chunks_mut(n_p).for_each(remove_mean);
            }
            out.copy_from_slice(&lu.solve(&r));
            return Ok(());
        }
        let blocks: Vec<Vec<f64>> = r_p
            .chunks(n_p)
            .map(|b| {
                let mut b = b.to_vec();
                if sys.enclosed {
                    remove_mean(&mut b);
                }
                b
            })
            .collect();
        // stage 1: independent Laplacian solves
        let z = blocks
            .iter()
            .map(|b| self.solve_laplacian(b))
            .collect::<Result<Vec<_>>>()?;
        match self.cfg.schur_form {
            SchurForm::General => {
                let mut w = vec![0.0; n_p];
                for k in 0..n_t {
                    // stage 2: bidiagonal F_p
                    sys.ops.f_p[k].mul_vec_into(&z[k], &mut w);
                    if k > 0 {
                        sys.ops.m_p.mul_vec_add(-1.0 / sys.dt, &z[k - 1], &mut w);
                    }
                    // stage 3: independent mass solves
                    out[k * n_p..(k + 1) * n_p].copy_from_slice(&self.solve_mass(&w));
                }
            }
            SchurForm::StokesSimplified => {
                for k in 0..n_t {
                    let m = self.solve_mass(&blocks[k]);
                    let o = &mut out[k * n_p..(k + 1) * n_p];
                    for i in 0..n_p {
                        let prev = if k > 0 { z[k - 1][i] } else { 0.0 };
                        o[i] = (z[k][i] - prev) / sys.dt + sys.mu * m[i];
                    }
                }
            }
        }
        Ok(())
    }

    fn forward_substitution(&self, r_u: &[f64], out: &mut [f64]) {
        let n_u = self.sys.n_u;
        for k in 0..self.sys.n_t {
            let (done, rest) = out.split_at_mut(k * n_u);
            let o = &mut rest[..n_u];
            o.copy_from_slice(&r_u[k * n_u..(k + 1) * n_u]);
            if k > 0 {
                self.sys.m_sub.mul_vec_add(1.0, &done[(k - 1) * n_u..], o);
            }
            self.f_u_lu[k].solve_in_place(o);
        }
    }

    /// `F_u^{-1} r_u` for the block lower-bidiagonal space-time velocity
    /// operator.
    pub fn solve_velocity_block(&self, r_u: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.sys.n_u * self.sys.n_t;
        if r_u.len() != n || out.len() != n {
            return Err(Error::DimensionMismatch("velocity space-time vector".into()));
        }
        match self.cfg.velocity {
            VelocitySolver::ExactTimeStepLu => {
                self.forward_substitution(r_u, out);
                Ok(())
            }
            VelocitySolver::InnerKrylov { tol, max_iter } => {
                let op = VelocityOperator(self.sys);
                let jacobi = BlockJacobi(self);
                let (x, rep) = gmres(&op, r_u, None, &KrylovConfig::new(tol, max_iter), Some(&jacobi))?;
                self.inner_iterations.fetch_add(rep.iterations, Ordering::Relaxed);
                out.copy_from_slice(&x);
                Ok(())
            }
        }
    }

    /// `z_p = -X^{-1} r_p`, `z_u = F_u^{-1}(r_u - B^T z_p)`.
    pub fn apply_pt_inverse(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        let sys = self.sys;
        let (n_u, n_p, n_t) = (sys.n_u, sys.n_p, sys.n_t);
        if r.len() != sys.dim() || z.len() != sys.dim() {
            return Err(Error::DimensionMismatch("space-time vector".into()));
        }
        let (r_u, r_p) = split(r, n_u, n_t);
        let (z_u, z_p) = split_mut(z, n_u, n_t);
        self.apply_schur_inverse(r_p, z_p)?;
        z_p.iter_mut().for_each(|v| *v = -*v);
        let mut t = r_u.to_vec();
        for k in 0..n_t {
            sys.bt.mul_vec_add(-1.0, &z_p[k * n_p..(k + 1) * n_p], &mut t[k * n_u..(k + 1) * n_u]);
        }
        self.solve_velocity_block(&t, z_u)
    }
}

impl Preconditioner for SpaceTimePreconditioner<'_> {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.apply_pt_inverse(r, z)
    }
}

/// Space-time velocity operator: `F_u[k]` on the diagonal, `-M_u/dt` below.
struct VelocityOperator<'a>(&'a SpaceTimeSystem);

impl LinearOperator for VelocityOperator<'_> {
    fn dim(&self) -> usize {
        self.0.n_u * self.0.n_t
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.0.n_u;
        for k in 0..self.0.n_t {
            let yk = &mut y[k * n..(k + 1) * n];
            self.0.f_u[k].mul_vec_into(&x[k * n..(k + 1) * n], yk);
            if k > 0 {
                self.0.m_sub.mul_vec_add(-1.0, &x[(k - 1) * n..k * n], yk);
            }
        }
    }
}

struct BlockJacobi<'a, 's>(&'a SpaceTimePreconditioner<'s>);

impl Preconditioner for BlockJacobi<'_, '_> {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        let n = self.0.sys.n_u;
        z.copy_from_slice(r);
        for (k, zk) in z.chunks_mut(n).enumerate() {
            self.0.f_u_lu[k].solve_in_place(zk);
        }
        Ok(())
    }
}

#[cfg(feature = "test-hooks")]
impl SpaceTimePreconditioner<'_> {
    /// Replaces `X` by the exact space-time Schur complement `B F_u^{-1} B^T`,
    /// formed densely. Enclosed flow: the per-step constant modes are lifted
    /// to the identity so the dense matrix is invertible.
    pub fn with_exact_schur(mut self) -> Result<Self> {
        use crate::linalg::DenseMatrix;
        let sys = self.sys;
        let (n_u, n_p, n_t) = (sys.n_u, sys.n_p, sys.n_t);
        let np = n_p * n_t;
        let mut s = DenseMatrix::zeros(np, np);
        let mut v = vec![0.0; n_u * n_t];
        let mut w = vec![0.0; n_u * n_t];
        let mut col = vec![0.0; n_p];
        for j in 0..np {
            let (kj, ij) = (j / n_p, j % n_p);
            v.iter_mut().for_each(|x| *x = 0.0);
            let mut e = vec![0.0; n_p];
            e[ij] = 1.0;
            sys.bt.mul_vec_into(&e, &mut v[kj * n_u..(kj + 1) * n_u]);
            self.forward_substitution(&v, &mut w);
            for k in 0..n_t {
                sys.b.mul_vec_into(&w[k * n_u..(k + 1) * n_u], &mut col);
                for i in 0..n_p {
                    s[(k * n_p + i, j)] = col[i];
                }
            }
        }
        if sys.enclosed {
            let c = 1.0 / n_p as f64;
            for k in 0..n_t {
                for i in 0..n_p {
                    for j in 0..n_p {
                        s[(k * n_p + i, k * n_p + j)] += c;
                    }
                }
            }
        }
        self.exact_schur = Some(s.lu()?);
        Ok(self)
    }
}
