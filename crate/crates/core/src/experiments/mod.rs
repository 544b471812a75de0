//! Drivers for the iteration-count tables, the inner tolerance sweep and the
//! eigenvalue plots, at desk scale.

mod report;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub use report::{Cell, CellStatus, ExperimentReport, Metadata, CSV_HEADER, EIGEN_HEADER, RESIDUAL_HEADER};

use crate::error::{Error, Result};
use crate::fem::build_spaces;
use crate::linalg::{KrylovConfig, SolveReport};
use crate::picard::{picard_solve, PicardConfig};
use crate::problems::{make_problem, ProblemId, ProblemSpec};
use crate::spacetime::{
    preconditioned_schur_eigs, sequential_time_stepping, solve_all_at_once, PrecondConfig, SpaceTimeSystem,
    VelocitySolver,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    Ideal,
    #[serde(rename = "approx")]
    Approximate,
}

impl SolverMode {
    pub fn label(self) -> &'static str {
        match self {
            SolverMode::Ideal => "ideal",
            SolverMode::Approximate => "approx",
        }
    }

    pub fn config(self) -> PrecondConfig {
        match self {
            SolverMode::Ideal => PrecondConfig::ideal(),
            SolverMode::Approximate => PrecondConfig::approximate(),
        }
    }
}

/// Problem-size guard: cells beyond these limits are reported as skipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeskCaps {
    pub max_r: u32,
    pub max_n_t: usize,
    /// Largest pressure space handed to the dense eigensolver.
    pub max_dense_np: usize,
}

impl Default for DeskCaps {
    fn default() -> Self {
        Self {
            max_r: 6,
            max_n_t: 64,
            max_dense_np: 1200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub caps: DeskCaps,
    /// Worker threads for independent cells.
    pub threads: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            caps: DeskCaps::default(),
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl RunSettings {
    fn krylov(&self) -> KrylovConfig {
        KrylovConfig::new(self.tol, self.max_iter)
    }

    fn size_check(&self, r: u32, n_t: usize) -> Option<String> {
        if r > self.caps.max_r {
            Some(format!("r={r} above cap {}", self.caps.max_r))
        } else if n_t > self.caps.max_n_t {
            Some(format!("N_t={n_t} above cap {}", self.caps.max_n_t))
        } else {
            None
        }
    }

    fn report(&self, experiment: &str, cells: Vec<Cell>) -> ExperimentReport {
        ExperimentReport {
            experiment: experiment.into(),
            metadata: Metadata {
                outer_tol: self.tol,
                max_iter: self.max_iter,
                seed: 0,
                timestamp: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs()),
                version: env!("CARGO_PKG_VERSION").into(),
            },
            cells,
        }
    }
}

/// `2^-e`.
pub fn dt_from_exp(e: u32) -> f64 {
    0.5f64.powi(e as i32)
}

fn problem_for(id: ProblemId, pe: f64) -> Result<ProblemSpec> {
    make_problem(id, (id == ProblemId::DoubleGlazing).then_some(pe))
}

/// Runs `work` on every cell not already skipped, on `threads` workers.
/// Output order equals input order.
fn run_cells<F>(cells: Vec<Cell>, threads: usize, work: F) -> Vec<Cell>
where
    F: Fn(&mut Cell) -> Result<()> + Sync,
{
    let n = cells.len();
    let slots: Vec<Mutex<Cell>> = cells.into_iter().map(Mutex::new).collect();
    let next = AtomicUsize::new(0);
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        if i >= n {
            break;
        }
        let mut cell = slots[i].lock().unwrap_or_else(|e| e.into_inner());
        if matches!(cell.status, CellStatus::Skipped(ref why) if why != "not run") {
            continue;
        }
        log::info!("{} r={} dt={} pe={} {}", cell.problem, cell.r, cell.dt, cell.pe, cell.mode);
        if let Err(e) = work(&mut cell) {
            cell.outer_iters = -1;
            cell.status = CellStatus::Failed(e.to_string());
        }
    };
    let threads = threads.clamp(1, n.max(1));
    if threads == 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(worker);
            }
        });
    }
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap_or_else(|e| e.into_inner()))
        .collect()
}

fn grid(problems: &[ProblemSpec], rs: &[u32], dt_exps: &[u32], mode: &str, settings: &RunSettings) -> Vec<Cell> {
    let mut cells = Vec::new();
    for p in problems {
        for &r in rs {
            for &e in dt_exps {
                let mut c = Cell::new(p.id, r, dt_from_exp(e), p.pe, mode);
                if let Some(why) = settings.size_check(r, 1usize << e) {
                    c.status = CellStatus::Skipped(why);
                }
                cells.push(c);
            }
        }
    }
    cells
}

fn record_solve(cell: &mut Cell, report: SolveReport) {
    if report.converged {
        cell.outer_iters = report.iterations as i64;
        cell.status = CellStatus::Converged;
    } else {
        cell.outer_iters = -1;
        cell.status = CellStatus::NotConverged;
    }
    cell.residuals = report.residual_history;
}

fn spec_of(cell: &Cell, problems: &[ProblemSpec]) -> Result<ProblemSpec> {
    problems
        .iter()
        .find(|p| p.id == cell.problem && p.pe == cell.pe)
        .copied()
        .map_or_else(|| problem_for(cell.problem, cell.pe), Ok)
}

fn all_at_once_cell(cell: &mut Cell, spec: &ProblemSpec, cfg: &PrecondConfig, settings: &RunSettings) -> Result<()> {
    let sys = SpaceTimeSystem::for_problem(spec, cell.r, cell.n_t())?;
    let sol = solve_all_at_once(&sys, cfg, &settings.krylov())?;
    if cfg.is_iterative() {
        cell.mean_inner_iters = Some(sol.inner_iterations as f64 / sol.report.iterations.max(1) as f64);
    }
    record_solve(cell, sol.report);
    Ok(())
}

/// Outer GMRES counts of the all-at-once solve over `problems x r x dt`.
pub fn run_table1(
    problems: &[ProblemSpec],
    rs: &[u32],
    dt_exps: &[u32],
    mode: SolverMode,
    settings: &RunSettings,
) -> Result<ExperimentReport> {
    let cfg = mode.config();
    let cells = grid(problems, rs, dt_exps, mode.label(), settings);
    let cells = run_cells(cells, settings.threads, |c| {
        let spec = spec_of(c, problems)?;
        all_at_once_cell(c, &spec, &cfg, settings)
    });
    Ok(settings.report("table1", cells))
}

/// Double-glazing counts for each Peclet number; failures to converge within
/// `settings.max_iter` are data.
pub fn run_table2_peclet(rs: &[u32], dt_exps: &[u32], pes: &[f64], settings: &RunSettings) -> Result<ExperimentReport> {
    let problems = pes
        .iter()
        .map(|&pe| make_problem(ProblemId::DoubleGlazing, Some(pe)))
        .collect::<Result<Vec<_>>>()?;
    let mut rep = run_table1(&problems, rs, dt_exps, SolverMode::Ideal, settings)?;
    rep.experiment = "table2".into();
    Ok(rep)
}

/// Outer FGMRES counts with an inner GMRES velocity solve at each tolerance
/// in `tols`, preceded by a direct-solve reference cell per problem.
pub fn run_inner_tolerance_sweep(
    problems: &[ProblemSpec],
    r: u32,
    dt_exp: u32,
    tols: &[f64],
    inner_max_iter: usize,
    settings: &RunSettings,
) -> Result<ExperimentReport> {
    if tols.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidArgument("inner tolerances must be positive".into()));
    }
    let mut cells = Vec::new();
    for p in problems {
        cells.extend(grid(std::slice::from_ref(p), &[r], &[dt_exp], SolverMode::Ideal.label(), settings));
        for &t in tols {
            cells.extend(grid(std::slice::from_ref(p), &[r], &[dt_exp], &format!("inner:{t:e}"), settings));
        }
    }
    let cells = run_cells(cells, settings.threads, |c| {
        let spec = spec_of(c, problems)?;
        let cfg = match c.mode.strip_prefix("inner:") {
            Some(t) => PrecondConfig::ideal().with_velocity(VelocitySolver::InnerKrylov {
                tol: t.parse().map_err(|_| Error::Format(t.into()))?,
                max_iter: inner_max_iter,
            }),
            None => PrecondConfig::ideal(),
        };
        all_at_once_cell(c, &spec, &cfg, settings)
    });
    Ok(settings.report("inner-tol", cells))
}

/// All-at-once count, mean sequential count per step and their ratio.
/// Sequential steps are solved to `tol / sqrt(N_t)`.
pub fn run_table4_ratio(
    problems: &[ProblemSpec],
    rs: &[u32],
    dt_exps: &[u32],
    settings: &RunSettings,
) -> Result<ExperimentReport> {
    let cfg = PrecondConfig::ideal();
    let cells = grid(problems, rs, dt_exps, "ratio", settings);
    let cells = run_cells(cells, settings.threads, |c| {
        let spec = spec_of(c, problems)?;
        let sys = SpaceTimeSystem::for_problem(&spec, c.r, c.n_t())?;
        let sol = solve_all_at_once(&sys, &cfg, &settings.krylov())?;
        record_solve(c, sol.report);
        match sequential_time_stepping(&sys, &cfg, settings.tol, settings.max_iter) {
            Ok((_, seq)) => {
                c.mean_inner_iters = Some(seq.mean_iterations);
                if let Some(n) = c.iterations() {
                    c.ratio = Some(n as f64 / seq.mean_iterations);
                }
            }
            Err(Error::StepNotConverged { .. }) => {
                c.status = CellStatus::NotConverged;
            }
            Err(e) => return Err(e),
        }
        Ok(())
    });
    Ok(settings.report("table4", cells))
}

/// Preconditioned Schur eigenvalues of the double-glazing flow at the
/// 0-based time steps `steps`. `Pe = 0` is the cavity Stokes flow.
pub fn run_eigs_figure(
    pes: &[f64],
    rs: &[u32],
    dt_exps: &[u32],
    steps: &[usize],
    settings: &RunSettings,
) -> Result<ExperimentReport> {
    let problems = pes
        .iter()
        .map(|&pe| make_problem(ProblemId::DoubleGlazing, Some(pe)))
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    for &k in steps {
        for mut c in grid(&problems, rs, dt_exps, &format!("eig:{k}"), settings) {
            let n_p = (2usize.pow(c.r) + 1).pow(2);
            if k >= c.n_t() {
                c.status = CellStatus::Skipped(format!("step {k} beyond N_t={}", c.n_t()));
            } else if n_p > settings.caps.max_dense_np {
                c.status = CellStatus::Skipped(format!("{n_p} pressure DOFs above dense cap"));
            }
            cells.push(c);
        }
    }
    let cells = run_cells(cells, settings.threads, |c| {
        let spec = spec_of(c, &problems)?;
        let k: usize = c.mode["eig:".len()..].parse().map_err(|_| Error::Format(c.mode.clone()))?;
        let sys = SpaceTimeSystem::for_problem(&spec, c.r, c.n_t())?;
        let eigs = preconditioned_schur_eigs(&sys, k)?;
        c.eigenvalues = eigs.iter().map(|z| [z.re, z.im]).collect();
        c.outer_iters = 0;
        c.status = CellStatus::Converged;
        Ok(())
    });
    Ok(settings.report("eigs", cells))
}

/// Picard counts: outer nonlinear iterations and mean inner GMRES
/// iterations per linear solve.
pub fn run_table3_navier_stokes(
    problems: &[ProblemSpec],
    rs: &[u32],
    dt_exps: &[u32],
    picard: &PicardConfig,
    settings: &RunSettings,
) -> Result<ExperimentReport> {
    if let Some(p) = problems.iter().find(|p| p.id == ProblemId::DoubleGlazing) {
        return Err(Error::InvalidArgument(format!("no Navier-Stokes variant of {}", p.id)));
    }
    let cells = grid(problems, rs, dt_exps, "picard", settings);
    let cells = run_cells(cells, settings.threads, |c| {
        let spec = spec_of(c, problems)?;
        let spaces = Arc::new(build_spaces(&spec.mesh(c.r)));
        let (_, rep) = picard_solve(&spec, spaces, c.n_t(), picard)?;
        c.mean_inner_iters = Some(rep.mean_inner_iterations);
        c.residuals = rep.residual_history;
        if rep.converged {
            c.outer_iters = rep.outer_iterations as i64;
            c.status = CellStatus::Converged;
        } else {
            c.outer_iters = -1;
            c.status = CellStatus::NotConverged;
        }
        Ok(())
    });
    Ok(settings.report("table3", cells))
}
