//! Picard linearisation of the space-time Navier-Stokes system.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{FESpaces, SpatialOperators, Wind};
use crate::linalg::KrylovConfig;
use crate::problems::{ProblemId, ProblemSpec};
use crate::spacetime::{
    solve_with_preconditioner, PrecondConfig, SpaceTimePreconditioner, SpaceTimeSystem, SpaceTimeVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    /// Relative nonlinear residual target.
    pub nl_tol: f64,
    pub max_outer: usize,
    pub inner_tol: f64,
    pub max_inner: usize,
    pub precond: PrecondConfig,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            nl_tol: 1e-9,
            max_outer: 30,
            inner_tol: 1e-10,
            max_inner: 200,
            precond: PrecondConfig::ideal(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PicardState {
    pub iterate: usize,
    pub x: SpaceTimeVector,
    /// Nonlinear residual after each linear solve.
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PicardReport {
    /// Number of linear space-time solves.
    pub outer_iterations: usize,
    pub inner_iterations: Vec<usize>,
    pub mean_inner_iterations: f64,
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

/// Fixed-point iteration: the first solve is Stokes (zero wind); every later
/// solve advects with the previous velocity iterate at the same time level
/// and starts from that iterate. Stops once the system linearised at the
/// current iterate is satisfied to `nl_tol` relative to its right-hand side.
pub fn picard_solve(
    problem: &ProblemSpec,
    spaces: Arc<FESpaces>,
    n_t: usize,
    cfg: &PicardConfig,
) -> Result<(SpaceTimeVector, PicardReport)> {
    if problem.id == ProblemId::DoubleGlazing {
        return Err(Error::InvalidArgument("the glazing flow has a prescribed wind".into()));
    }
    if !(cfg.nl_tol > 0.0) || cfg.max_outer == 0 {
        return Err(Error::InvalidArgument(format!(
            "nl_tol {} and max_outer {}",
            cfg.nl_tol, cfg.max_outer
        )));
    }
    if n_t == 0 {
        return Err(Error::InvalidArgument("n_t must be >= 1".into()));
    }
    let dt = (problem.t_end - problem.t0) / n_t as f64;
    let stokes = SpatialOperators::assemble(&spaces, dt, problem.mu, &vec![Wind::Zero; n_t])?;
    let krylov = KrylovConfig::new(cfg.inner_tol, cfg.max_inner);

    let mut sys = SpaceTimeSystem::from_operators(problem, spaces.clone(), stokes.clone())?;
    let mut state = PicardState {
        iterate: 0,
        x: sys.initial_guess(),
        residual_history: Vec::new(),
    };
    let mut inner = Vec::new();
    let mut converged = false;
    loop {
        let precond = SpaceTimePreconditioner::new(&sys, cfg.precond)?;
        let warm = (state.iterate > 0).then(|| state.x.as_slice().to_vec());
        let sol = solve_with_preconditioner(&sys, &precond, &krylov, warm.as_deref())?;
        log::debug!(
            "picard {}: {} linear iterations, residual {:e}",
            state.iterate,
            sol.report.iterations,
            sol.report.final_residual
        );
        inner.push(sol.report.iterations);
        state.x = sol.x;
        state.iterate += 1;

        let winds: Vec<Wind> = (0..n_t).map(|k| Wind::Discrete(state.x.u(k))).collect();
        let ops = stokes.with_winds(&spaces, &winds)?;
        sys = SpaceTimeSystem::from_operators(problem, spaces.clone(), ops)?;
        let res = sys.relative_residual(state.x.as_slice());
        state.residual_history.push(res);
        if res <= cfg.nl_tol {
            converged = true;
            break;
        }
        if state.iterate >= cfg.max_outer {
            break;
        }
    }
    let mean = inner.iter().sum::<usize>() as f64 / inner.len() as f64;
    Ok((
        state.x,
        PicardReport {
            outer_iterations: state.iterate,
            inner_iterations: inner,
            mean_inner_iterations: mean,
            residual_history: state.residual_history,
            converged,
        },
    ))
}
