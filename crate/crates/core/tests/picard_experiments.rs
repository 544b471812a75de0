mod common;

use std::sync::Arc;

use proptest::prelude::*;
use stflow::experiments::{
    run_eigs_figure, run_inner_tolerance_sweep, run_table1, run_table2_peclet, run_table3_navier_stokes,
    run_table4_ratio, Cell, CellStatus, ExperimentReport, Metadata, RunSettings, SolverMode,
};
use stflow::fem::{build_spaces, SpatialOperators, Wind};
use stflow::{make_problem, picard_solve, PicardConfig, ProblemId, SpaceTimeSystem};

fn settings() -> RunSettings {
    RunSettings {
        threads: 2,
        ..RunSettings::default()
    }
}

fn cavity() -> stflow::ProblemSpec {
    make_problem(ProblemId::Cavity, None).unwrap()
}

#[test]
fn picard_residuals_decrease_and_fixed_point_holds() {
    let p = cavity();
    let spaces = Arc::new(build_spaces(&p.mesh(3)));
    let cfg = PicardConfig::default();
    let (x, rep) = picard_solve(&p, spaces.clone(), 4, &cfg).unwrap();
    assert!(rep.converged);
    assert_eq!(rep.inner_iterations.len(), rep.outer_iterations);
    assert!(rep.residual_history.windows(2).all(|w| w[1] < w[0]));

    // relinearise at the converged velocity and check the residual independently
    let winds: Vec<Wind> = (0..4).map(|k| Wind::Discrete(x.u(k))).collect();
    let ops = SpatialOperators::assemble(&spaces, 0.25, p.mu, &winds).unwrap();
    let sys = SpaceTimeSystem::from_operators(&p, spaces, ops).unwrap();
    assert!(sys.relative_residual(x.as_slice()) <= cfg.nl_tol);
}

#[test]
fn picard_outer_counts_are_mesh_independent() {
    let rep = run_table3_navier_stokes(&[cavity()], &[2, 3, 4], &[2, 3, 4], &PicardConfig::default(), &settings())
        .unwrap();
    let counts: Vec<usize> = rep.cells.iter().map(|c| c.iterations().unwrap()).collect();
    let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
    assert!(hi - lo <= 2, "{counts:?}");
}

#[test]
fn zero_amplitude_is_a_stokes_fixed_point() {
    let p = cavity().with_amplitude(0.0);
    let spaces = Arc::new(build_spaces(&p.mesh(2)));
    let (_, rep) = picard_solve(&p, spaces, 2, &PicardConfig::default()).unwrap();
    assert_eq!(rep.outer_iterations, 1);
    assert!(rep.converged);
}

#[test]
fn poiseuille_is_linear() {
    let p = make_problem(ProblemId::Poiseuille, None).unwrap();
    let spaces = Arc::new(build_spaces(&p.mesh(2)));
    let (_, rep) = picard_solve(&p, spaces, 4, &PicardConfig::default()).unwrap();
    assert_eq!(rep.outer_iterations, 1);
}

#[test]
fn reports_are_deterministic() {
    let run = || {
        run_table1(&[cavity()], &[1, 2], &[1, 2], SolverMode::Approximate, &settings())
            .unwrap()
            .cells
    };
    assert_eq!(run(), run());
}

#[test]
fn report_files_round_trip() {
    let mut rep = run_table4_ratio(&[cavity()], &[1, 2], &[1, 2], &settings()).unwrap();
    rep.cells.extend(run_eigs_figure(&[0.0], &[1], &[1], &[0, 5], &settings()).unwrap().cells);
    let mut table = Vec::new();
    let mut res = Vec::new();
    let mut eig = Vec::new();
    rep.write_csv(&mut table).unwrap();
    rep.write_residuals_csv(&mut res).unwrap();
    rep.write_eigen_csv(&mut eig).unwrap();
    let mut cells = ExperimentReport::read_csv(table.as_slice()).unwrap();
    ExperimentReport::read_residuals_csv(res.as_slice(), &mut cells).unwrap();
    ExperimentReport::read_eigen_csv(eig.as_slice(), &mut cells).unwrap();
    assert_eq!(cells, rep.cells);
    assert_eq!(ExperimentReport::from_json(&rep.to_json().unwrap()).unwrap(), rep);
    assert!(matches!(rep.cells.last().unwrap().status, CellStatus::Skipped(_)));
}

#[test]
fn peclet_zero_reduces_to_cavity() {
    let a = run_table2_peclet(&[2], &[2], &[0.0], &settings()).unwrap();
    let b = run_table1(&[cavity()], &[2], &[2], SolverMode::Ideal, &settings()).unwrap();
    assert_eq!(a.cells[0].outer_iters, b.cells[0].outer_iters);
}

#[test]
fn tight_inner_tolerance_matches_direct_solve() {
    let rep = run_inner_tolerance_sweep(&[cavity()], 2, 3, &[1e-13, 1e0], 200, &settings()).unwrap();
    let direct = rep.cells[0].outer_iters;
    assert!((rep.cells[1].outer_iters - direct).abs() <= 1);
    // a useless inner solve degrades the outer iteration
    let lax = rep.cells[2].iterations().map_or(i64::MAX, |n| n as i64);
    assert!(lax > direct);
}

#[test]
fn poiseuille_ratio_grows_as_dt_shrinks() {
    let p = make_problem(ProblemId::Poiseuille, None).unwrap();
    let rep = run_table4_ratio(&[p], &[2, 3], &[2, 3, 4, 5], &settings()).unwrap();
    for row in rep.cells.chunks(4) {
        let ratios: Vec<f64> = row.iter().map(|c| c.ratio.unwrap()).collect();
        let last = *ratios.last().unwrap();
        assert!(ratios.iter().all(|&q| q <= last), "{ratios:?}");
        assert!(ratios.iter().all(|&q| q >= 1.0));
    }
}

fn cell_strategy() -> impl Strategy<Value = Cell> {
    (
        prop::sample::select(ProblemId::ALL.to_vec()),
        0u32..8,
        -1e6f64..1e6,
        0.0f64..1e4,
        "[a-z0-9:.+-]{0,12}",
        -1i64..500,
        prop::option::of(0.0f64..1e3),
        prop::option::of(any::<f64>().prop_filter("finite", |x| x.is_finite())),
        prop_oneof![
            Just(CellStatus::Converged),
            Just(CellStatus::NotConverged),
            "[ -~]{0,20}".prop_map(CellStatus::Skipped),
            "[ -~]{0,20}".prop_map(CellStatus::Failed),
        ],
        prop::collection::vec(0.0f64..10.0, 0..5),
        prop::collection::vec(prop::array::uniform2(-5.0f64..5.0), 0..4),
    )
        .prop_map(|(problem, r, dt, pe, mode, outer, inner, ratio, status, residuals, eigenvalues)| Cell {
            problem,
            r,
            dt,
            pe,
            mode,
            outer_iters: outer,
            mean_inner_iters: inner,
            ratio,
            status,
            residuals,
            eigenvalues,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_report_round_trips(cells in prop::collection::vec(cell_strategy(), 0..6)) {
        let rep = ExperimentReport {
            experiment: "prop".into(),
            metadata: Metadata { outer_tol: 1e-10, max_iter: 100, seed: 0, timestamp: 1, version: "x".into() },
            cells,
        };
        let mut table = Vec::new();
        let mut res = Vec::new();
        let mut eig = Vec::new();
        rep.write_csv(&mut table).unwrap();
        rep.write_residuals_csv(&mut res).unwrap();
        rep.write_eigen_csv(&mut eig).unwrap();
        let mut cells = ExperimentReport::read_csv(table.as_slice()).unwrap();
        ExperimentReport::read_residuals_csv(res.as_slice(), &mut cells).unwrap();
        ExperimentReport::read_eigen_csv(eig.as_slice(), &mut cells).unwrap();
        prop_assert_eq!(&cells, &rep.cells);
        prop_assert_eq!(ExperimentReport::from_json(&rep.to_json().unwrap()).unwrap(), rep);
    }
}
