use std::process::Command;

use stflow::experiments::{CellStatus, ExperimentReport};

fn stflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stflow"))
}

#[test]
fn solve_writes_csv_and_vtk() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve.csv");
    let vtk = dir.path().join("mesh.vtk");
    let status = stflow()
        .args(["solve", "--problem", "poiseuille", "--r", "1", "--dt-exp", "1", "--vtk"])
        .arg(&vtk)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let cells = ExperimentReport::read_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(cells.len(), 1);
    assert_eq!(cells[0].status, CellStatus::Converged);
    assert!(cells[0].outer_iters > 0);
    let mut cells = cells;
    let res = std::fs::File::open(dir.path().join("solve_residuals.csv")).unwrap();
    ExperimentReport::read_residuals_csv(res, &mut cells).unwrap();
    assert_eq!(cells[0].residuals.len() as i64, cells[0].outer_iters + 1);
    assert!(std::fs::read_to_string(&vtk).unwrap().starts_with("# vtk DataFile"));
}

#[test]
fn json_output_parses() {
    let out = stflow()
        .args(["table1", "--problem", "cavity,glazing", "--pe", "5", "--r", "1", "--dt-exp", "1", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rep = ExperimentReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(rep.experiment, "table1");
    assert_eq!(rep.cells.len(), 2);
    assert_eq!(rep.cells[1].pe, 5.0);
}

#[test]
fn navier_stokes_solve() {
    let out = stflow()
        .args(["solve", "--problem", "cavity", "--r", "1", "--dt-exp", "1", "--navier-stokes"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let cells = ExperimentReport::read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(cells[0].mode, "picard");
    assert!(cells[0].mean_inner_iters.is_some());
}

#[test]
fn rejects_bad_arguments() {
    for args in [
        vec!["solve", "--problem", "nowhere"],
        vec!["solve", "--problem", "cavity", "--pe", "3"],
        vec!["solve", "--problem", "cavity", "--mode", "fast"],
        vec!["table3", "--problem", "glazing"],
    ] {
        let out = stflow().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?} should fail");
    }
}
