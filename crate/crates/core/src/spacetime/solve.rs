//! All-at-once and sequential solution of the space-time system.

use serde::{Deserialize, Serialize};

use super::precond::{PrecondConfig, SpaceTimePreconditioner};
use super::system::{SpaceTimeSystem, SpaceTimeVector};
use crate::error::{Error, Result};
use crate::linalg::{gmres, KrylovConfig, SolveReport};

#[derive(Debug, Clone)]
pub struct SpaceTimeSolution {
    pub x: SpaceTimeVector,
    pub report: SolveReport,
    /// Total inner iterations spent inside the preconditioner.
    pub inner_iterations: usize,
}

/// Right-preconditioned (F)GMRES on the whole space-time system.
///
/// The initial guess is zero apart from the Dirichlet values. GMRES is
/// switched to its flexible variant whenever a component solver is iterative.
pub fn solve_all_at_once(
    sys: &SpaceTimeSystem,
    cfg: &PrecondConfig,
    krylov: &KrylovConfig,
) -> Result<SpaceTimeSolution> {
    let precond = SpaceTimePreconditioner::new(sys, *cfg)?;
    solve_with_preconditioner(sys, &precond, krylov, None)
}

/// As [`solve_all_at_once`] with a prebuilt preconditioner and an optional
/// initial guess (Dirichlet values are reimposed on it).
pub fn solve_with_preconditioner(
    sys: &SpaceTimeSystem,
    precond: &SpaceTimePreconditioner,
    krylov: &KrylovConfig,
    x0: Option<&[f64]>,
) -> Result<SpaceTimeSolution> {
    let mut guess = sys.initial_guess();
    if let Some(x0) = x0 {
        if x0.len() != sys.dim() {
            return Err(Error::DimensionMismatch("initial guess".into()));
        }
        let mask = sys.velocity_mask();
        let g = guess.as_mut_slice();
        for (i, (gi, xi)) in g.iter_mut().zip(x0).enumerate() {
            let in_velocity = i < sys.n_u * sys.n_t;
            if !(in_velocity && mask[i % sys.n_u]) {
                *gi = *xi;
            }
        }
    }
    let cfg = krylov.flexible(krylov.flexible || precond.config().is_iterative());
    let before = precond.inner_iterations();
    let (x, report) = gmres(sys, sys.rhs.as_slice(), Some(guess.as_slice()), &cfg, Some(precond))?;
    Ok(SpaceTimeSolution {
        x: SpaceTimeVector::from_vec(sys.n_u, sys.n_p, sys.n_t, x)?,
        report,
        inner_iterations: precond.inner_iterations() - before,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequentialReport {
    pub iterations: Vec<usize>,
    /// Mean GMRES iterations per step.
    pub mean_iterations: f64,
    pub step_tol: f64,
}

/// Implicit Euler stepping: each step's saddle-point system is solved by
/// GMRES preconditioned with the single-step version of the same
/// preconditioner, to `outer_tol / sqrt(N_t)`, starting from the previous
/// step's solution.
pub fn sequential_time_stepping(
    sys: &SpaceTimeSystem,
    cfg: &PrecondConfig,
    outer_tol: f64,
    max_iter: usize,
) -> Result<(SpaceTimeVector, SequentialReport)> {
    let step_tol = outer_tol / (sys.n_t as f64).sqrt();
    let krylov = KrylovConfig::new(step_tol, max_iter);
    let full = SpaceTimePreconditioner::new(sys, *cfg)?;
    let mut x = SpaceTimeVector::zeros(sys.n_u, sys.n_p, sys.n_t);
    let mut prev = vec![0.0; sys.n_u + sys.n_p];
    let mut iterations = Vec::with_capacity(sys.n_t);
    for k in 0..sys.n_t {
        let u_prev = prev[..sys.n_u].to_vec();
        let step_sys = sys.step(k, &u_prev);
        let pre = full.for_step(&step_sys, k);
        let sol = solve_with_preconditioner(&step_sys, &pre, &krylov, Some(&prev))?;
        if !sol.report.converged {
            return Err(Error::StepNotConverged {
                step: k + 1,
                iterations: sol.report.iterations,
                residual: sol.report.final_residual,
            });
        }
        iterations.push(sol.report.iterations);
        x.u_mut(k).copy_from_slice(sol.x.u(0));
        x.p_mut(k).copy_from_slice(sol.x.p(0));
        prev = sol.x.into_vec();
    }
    let mean_iterations = iterations.iter().sum::<usize>() as f64 / sys.n_t as f64;
    Ok((
        x,
        SequentialReport {
            iterations,
            mean_iterations,
            step_tol,
        },
    ))
}
