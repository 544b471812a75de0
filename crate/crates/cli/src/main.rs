use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use stflow::experiments::{
    run_eigs_figure, run_inner_tolerance_sweep, run_table1, run_table2_peclet, run_table3_navier_stokes,
    run_table4_ratio, ExperimentReport, RunSettings, SolverMode,
};
use stflow::{make_problem, PicardConfig, ProblemId, ProblemSpec};

#[derive(Parser)]
#[command(name = "stflow", version, about = "All-at-once space-time flow solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and report the iteration count.
    Solve(SolveArgs),
    /// Outer GMRES counts over a grid of problems, refinements and steps.
    Table1(GridArgs),
    /// Double-glazing counts for several Peclet numbers.
    Table2(GridArgs),
    /// Picard counts for the Navier-Stokes cavity and step flows.
    Table3(GridArgs),
    /// All-at-once vs sequential time stepping iteration ratio.
    Table4(GridArgs),
    /// Eigenvalues of the preconditioned pressure Schur complement.
    Eigs(EigsArgs),
    /// Outer FGMRES counts against the inner velocity solver tolerance.
    InnerTol(InnerTolArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Ideal,
    Approx,
}

impl From<Mode> for SolverMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Ideal => SolverMode::Ideal,
            Mode::Approx => SolverMode::Approximate,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Outer Krylov tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Report destination; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Use the time-independent Poiseuille pressure 8(1-x).
    #[arg(long)]
    steady_pressure: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn settings(&self) -> RunSettings {
        let mut s = RunSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            ..RunSettings::default()
        };
        if let Some(t) = self.threads {
            s.threads = t;
        }
        s
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 3)]
    r: u32,
    #[arg(long, default_value_t = 3)]
    dt_exp: u32,
    #[arg(long)]
    pe: Option<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Ideal)]
    mode: Mode,
    /// Picard iteration for the Navier-Stokes equations.
    #[arg(long)]
    navier_stokes: bool,
    /// Write the mesh in legacy VTK format.
    #[arg(long)]
    vtk: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GridArgs {
    /// Comma separated; defaults depend on the table.
    #[arg(long, value_delimiter = ',')]
    problem: Vec<String>,
    /// Refinement levels (default 2,3,4; 2..5 for table2).
    #[arg(long, value_delimiter = ',')]
    r: Vec<u32>,
    /// Step exponents, dt = 2^-e (default 2..5; 4 for table2, 1..3 for table3).
    #[arg(long, value_delimiter = ',')]
    dt_exp: Vec<u32>,
    /// Peclet numbers for the glazing problem.
    #[arg(long, value_delimiter = ',')]
    pe: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Ideal)]
    mode: Mode,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EigsArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 10.0, 100.0])]
    pe: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [4])]
    r: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = [3, 5])]
    dt_exp: Vec<u32>,
    /// 0-based time steps.
    #[arg(long, value_delimiter = ',', default_values_t = [0])]
    step: Vec<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct InnerTolArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [String::from("cavity")])]
    problem: Vec<String>,
    #[arg(long, default_value_t = 4)]
    r: u32,
    #[arg(long, default_value_t = 4)]
    dt_exp: u32,
    #[arg(long, default_value_t = 10.0)]
    pe: f64,
    /// Inner tolerances 1e-1 ... 1e-13 unless given.
    #[arg(long, value_delimiter = ',')]
    inner_tol: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    inner_max_iter: usize,
    #[command(flatten)]
    common: Common,
}

fn problem(name: &str, pe: Option<f64>, steady_pressure: bool) -> anyhow::Result<ProblemSpec> {
    let id: ProblemId = name.parse()?;
    let pe = match id {
        ProblemId::DoubleGlazing => Some(pe.unwrap_or(10.0)),
        _ => None,
    };
    Ok(make_problem(id, pe)?.with_steady_pressure(steady_pressure))
}

fn problems(names: &[String], pes: &[f64], default: &[&str], steady_pressure: bool) -> anyhow::Result<Vec<ProblemSpec>> {
    let names: Vec<&str> = if names.is_empty() {
        default.to_vec()
    } else {
        names.iter().map(String::as_str).collect()
    };
    let mut out = Vec::new();
    for n in names {
        if n == ProblemId::DoubleGlazing.name() && !pes.is_empty() {
            for &pe in pes {
                out.push(problem(n, Some(pe), steady_pressure)?);
            }
        } else {
            out.push(problem(n, None, steady_pressure)?);
        }
    }
    Ok(out)
}

impl GridArgs {
    fn rs(&self, default: &[u32]) -> Vec<u32> {
        or_default(&self.r, default)
    }

    fn dts(&self, default: &[u32]) -> Vec<u32> {
        or_default(&self.dt_exp, default)
    }
}

fn or_default(given: &[u32], default: &[u32]) -> Vec<u32> {
    if given.is_empty() {
        default.to_vec()
    } else {
        given.to_vec()
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn emit(report: &ExperimentReport, common: &Common) -> anyhow::Result<()> {
    match (&common.out, common.format) {
        (None, Format::Json) => writeln!(std::io::stdout().lock(), "{}", report.to_json()?)?,
        (None, Format::Csv) => {
            report.write_csv(std::io::stdout().lock())?;
            eprint!("{}", report.render_table());
        }
        (Some(path), Format::Json) => {
            std::fs::write(path, report.to_json()?).with_context(|| format!("writing {}", path.display()))?;
        }
        (Some(path), Format::Csv) => {
            let open = |p: &Path| -> anyhow::Result<BufWriter<File>> {
                Ok(BufWriter::new(
                    File::create(p).with_context(|| format!("creating {}", p.display()))?,
                ))
            };
            report.write_csv(open(path)?)?;
            if report.cells.iter().any(|c| !c.residuals.is_empty()) {
                report.write_residuals_csv(open(&sibling(path, "residuals"))?)?;
            }
            if report.cells.iter().any(|c| !c.eigenvalues.is_empty()) {
                report.write_eigen_csv(open(&sibling(path, "eigs"))?)?;
            }
            eprint!("{}", report.render_table());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve(a) => {
            let spec = problem(&a.problem, a.pe, a.common.steady_pressure)?;
            if a.pe.is_some() && spec.id != ProblemId::DoubleGlazing {
                bail!("--pe only applies to the glazing problem");
            }
            if let Some(path) = &a.vtk {
                let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                spec.mesh(a.r).write_vtk(BufWriter::new(f))?;
            }
            let s = a.common.settings();
            let report = if a.navier_stokes {
                let cfg = PicardConfig {
                    precond: SolverMode::from(a.mode).config(),
                    ..PicardConfig::default()
                };
                run_table3_navier_stokes(&[spec], &[a.r], &[a.dt_exp], &cfg, &s)?
            } else {
                run_table1(&[spec], &[a.r], &[a.dt_exp], a.mode.into(), &s)?
            };
            emit(&report, &a.common)
        }
        Command::Table1(a) => {
            let ps = problems(&a.problem, &a.pe, &["cavity", "poiseuille", "backstep", "glazing"], a.common.steady_pressure)?;
            emit(&run_table1(&ps, &a.rs(&[2, 3, 4]), &a.dts(&[2, 3, 4, 5]), a.mode.into(), &a.common.settings())?, &a.common)
        }
        Command::Table2(a) => {
            let pes = if a.pe.is_empty() {
                vec![16.0, 32.0, 64.0, 128.0, 256.0]
            } else {
                a.pe.clone()
            };
            emit(&run_table2_peclet(&a.rs(&[2, 3, 4, 5]), &a.dts(&[4]), &pes, &a.common.settings())?, &a.common)
        }
        Command::Table3(a) => {
            let ps = problems(&a.problem, &[], &["cavity", "backstep"], a.common.steady_pressure)?;
            let cfg = PicardConfig {
                precond: SolverMode::from(a.mode).config(),
                ..PicardConfig::default()
            };
            emit(&run_table3_navier_stokes(&ps, &a.rs(&[2, 3, 4]), &a.dts(&[1, 2, 3]), &cfg, &a.common.settings())?, &a.common)
        }
        Command::Table4(a) => {
            let ps = problems(&a.problem, &a.pe, &["cavity", "poiseuille", "backstep", "glazing"], a.common.steady_pressure)?;
            emit(&run_table4_ratio(&ps, &a.rs(&[2, 3, 4]), &a.dts(&[2, 3, 4, 5]), &a.common.settings())?, &a.common)
        }
        Command::Eigs(a) => emit(
            &run_eigs_figure(&a.pe, &a.r, &a.dt_exp, &a.step, &a.common.settings())?,
            &a.common,
        ),
        Command::InnerTol(a) => {
            let ps = problems(&a.problem, &[a.pe], &[], a.common.steady_pressure)?;
            let tols = if a.inner_tol.is_empty() {
                (1..=13).map(|e| 10f64.powi(-e)).collect()
            } else {
                a.inner_tol.clone()
            };
            emit(
                &run_inner_tolerance_sweep(&ps, a.r, a.dt_exp, &tols, a.inner_max_iter, &a.common.settings())?,
                &a.common,
            )
        }
    }
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    run(Cli::parse())
}
