//! Report types and their CSV / JSON forms.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemId;

pub const CSV_HEADER: [&str; 9] = [
    "problem",
    "r",
    "dt",
    "pe",
    "mode",
    "outer_iters",
    "mean_inner_iters",
    "ratio",
    "converged",
];

pub const RESIDUAL_HEADER: [&str; 3] = ["cell_id", "iter", "relres"];
pub const EIGEN_HEADER: [&str; 3] = ["cell_id", "re", "im"];

/// Outcome of one grid cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum CellStatus {
    Converged,
    NotConverged,
    Skipped(String),
    Failed(String),
}

impl CellStatus {
    pub fn is_converged(&self) -> bool {
        matches!(self, CellStatus::Converged)
    }
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellStatus::Converged => f.write_str("yes"),
            CellStatus::NotConverged => f.write_str("no"),
            CellStatus::Skipped(why) => write!(f, "skipped: {why}"),
            CellStatus::Failed(why) => write!(f, "failed: {why}"),
        }
    }
}

impl FromStr for CellStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "yes" => Ok(CellStatus::Converged),
            "no" => Ok(CellStatus::NotConverged),
            _ => {
                if let Some(why) = s.strip_prefix("skipped: ") {
                    Ok(CellStatus::Skipped(why.to_string()))
                } else if let Some(why) = s.strip_prefix("failed: ") {
                    Ok(CellStatus::Failed(why.to_string()))
                } else {
                    Err(Error::Format(format!("bad status '{s}'")))
                }
            }
        }
    }
}

/// One entry of a parameter grid. `outer_iters` is -1 when the solver did
/// not converge or the cell was not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub problem: ProblemId,
    pub r: u32,
    pub dt: f64,
    pub pe: f64,
    pub mode: String,
    pub outer_iters: i64,
    pub mean_inner_iters: Option<f64>,
    pub ratio: Option<f64>,
    pub status: CellStatus,
    #[serde(default)]
    pub residuals: Vec<f64>,
    /// `[re, im]` pairs.
    #[serde(default)]
    pub eigenvalues: Vec<[f64; 2]>,
}

impl Cell {
    pub fn new(problem: ProblemId, r: u32, dt: f64, pe: f64, mode: impl Into<String>) -> Self {
        Self {
            problem,
            r,
            dt,
            pe,
            mode: mode.into(),
            outer_iters: -1,
            mean_inner_iters: None,
            ratio: None,
            status: CellStatus::Skipped("not run".into()),
            residuals: Vec::new(),
            eigenvalues: Vec::new(),
        }
    }

    /// Outer count, `None` for the `//` cells.
    pub fn iterations(&self) -> Option<usize> {
        usize::try_from(self.outer_iters).ok()
    }

    pub fn n_t(&self) -> usize {
        (1.0 / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub outer_tol: f64,
    pub max_iter: usize,
    /// Nothing is random; kept for the record.
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub metadata: Metadata,
    pub cells: Vec<Cell>,
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn parse<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Format(format!("cannot parse {what} from '{s}'")))
}

fn parse_opt(s: &str, what: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse(s, what).map(Some)
    }
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Format(format!("unexpected header {header:?}")));
    }
    Ok(())
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// The table itself; residuals and eigenvalues go to their own files.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(CSV_HEADER)?;
        for c in &self.cells {
            wtr.write_record([
                c.problem.name().to_string(),
                c.r.to_string(),
                c.dt.to_string(),
                c.pe.to_string(),
                c.mode.clone(),
                c.outer_iters.to_string(),
                fmt_opt(c.mean_inner_iters),
                fmt_opt(c.ratio),
                c.status.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Vec<Cell>> {
        let mut rdr = csv::Reader::from_reader(r);
        check_header(&mut rdr, &CSV_HEADER)?;
        let mut cells = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != CSV_HEADER.len() {
                return Err(Error::Format(format!("row with {} fields", rec.len())));
            }
            cells.push(Cell {
                problem: rec[0].parse()?,
                r: parse(&rec[1], "r")?,
                dt: parse(&rec[2], "dt")?,
                pe: parse(&rec[3], "pe")?,
                mode: rec[4].to_string(),
                outer_iters: parse(&rec[5], "outer_iters")?,
                mean_inner_iters: parse_opt(&rec[6], "mean_inner_iters")?,
                ratio: parse_opt(&rec[7], "ratio")?,
                status: rec[8].parse()?,
                residuals: Vec::new(),
                eigenvalues: Vec::new(),
            });
        }
        Ok(cells)
    }

    /// Long format `cell_id,iter,relres`; `cell_id` indexes `cells`.
    pub fn write_residuals_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(RESIDUAL_HEADER)?;
        for (id, c) in self.cells.iter().enumerate() {
            for (it, res) in c.residuals.iter().enumerate() {
                wtr.write_record([id.to_string(), it.to_string(), format!("{res:e}")])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Fills `residuals` of cells read back with [`ExperimentReport::read_csv`].
    pub fn read_residuals_csv<R: Read>(r: R, cells: &mut [Cell]) -> Result<()> {
        let mut rdr = csv::Reader::from_reader(r);
        check_header(&mut rdr, &RESIDUAL_HEADER)?;
        for rec in rdr.records() {
            let rec = rec?;
            let id: usize = parse(&rec[0], "cell_id")?;
            let it: usize = parse(&rec[1], "iter")?;
            let cell = cells
                .get_mut(id)
                .ok_or_else(|| Error::Format(format!("cell_id {id} out of range")))?;
            if it != cell.residuals.len() {
                return Err(Error::Format(format!("cell {id}: iteration {it} out of order")));
            }
            cell.residuals.push(parse(&rec[2], "relres")?);
        }
        Ok(())
    }

    /// Long format `cell_id,re,im`.
    pub fn write_eigen_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(EIGEN_HEADER)?;
        for (id, c) in self.cells.iter().enumerate() {
            for [re, im] in &c.eigenvalues {
                wtr.write_record([id.to_string(), re.to_string(), im.to_string()])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_eigen_csv<R: Read>(r: R, cells: &mut [Cell]) -> Result<()> {
        let mut rdr = csv::Reader::from_reader(r);
        check_header(&mut rdr, &EIGEN_HEADER)?;
        for rec in rdr.records() {
            let rec = rec?;
            let id: usize = parse(&rec[0], "cell_id")?;
            let cell = cells
                .get_mut(id)
                .ok_or_else(|| Error::Format(format!("cell_id {id} out of range")))?;
            cell.eigenvalues
                .push([parse(&rec[1], "re")?, parse(&rec[2], "im")?]);
        }
        Ok(())
    }

    /// Plain-text grid of outer counts, `//` for failures.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        for c in &self.cells {
            let its = match (c.iterations(), &c.status) {
                (Some(n), _) => n.to_string(),
                (None, CellStatus::Skipped(_)) => "skip".into(),
                (None, _) => "//".into(),
            };
            let mut line = format!(
                "{:<10} r={} dt={:<9} pe={:<5} {:<12} {:>4}",
                c.problem.name(),
                c.r,
                c.dt,
                c.pe,
                c.mode,
                its
            );
            if let Some(m) = c.mean_inner_iters {
                line.push_str(&format!("  inner {m:.2}"));
            }
            if let Some(q) = c.ratio {
                line.push_str(&format!("  ratio {q:.3}"));
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut a = Cell::new(ProblemId::Cavity, 3, 0.125, 0.0, "ideal");
        a.outer_iters = 24;
        a.status = CellStatus::Converged;
        a.residuals = vec![1.0, 0.1, 1.0 / 3.0];
        a.ratio = Some(1.2345678901234567);
        let mut b = Cell::new(ProblemId::DoubleGlazing, 2, 0.0625, 64.0, "ideal");
        b.status = CellStatus::NotConverged;
        b.eigenvalues = vec![[0.5, -0.25], [1.0, 0.0]];
        let c = Cell::new(ProblemId::BackStep, 7, 0.5, 0.0, "approx");
        ExperimentReport {
            experiment: "sample".into(),
            metadata: Metadata {
                outer_tol: 1e-10,
                max_iter: 100,
                seed: 0,
                timestamp: 0,
                version: "0".into(),
            },
            cells: vec![a, b, c],
        }
    }

    #[test]
    fn csv_round_trip() {
        let rep = sample();
        let mut table = Vec::new();
        rep.write_csv(&mut table).unwrap();
        let mut res = Vec::new();
        rep.write_residuals_csv(&mut res).unwrap();
        let mut eig = Vec::new();
        rep.write_eigen_csv(&mut eig).unwrap();
        let mut cells = ExperimentReport::read_csv(table.as_slice()).unwrap();
        ExperimentReport::read_residuals_csv(res.as_slice(), &mut cells).unwrap();
        ExperimentReport::read_eigen_csv(eig.as_slice(), &mut cells).unwrap();
        assert_eq!(cells, rep.cells);
        let text = String::from_utf8(table).unwrap();
        assert!(text.starts_with("problem,r,dt,pe,mode,outer_iters,mean_inner_iters,ratio,converged\n"));
        assert!(text.contains(",-1,"));
    }

    #[test]
    fn json_round_trip() {
        let rep = sample();
        assert_eq!(ExperimentReport::from_json(&rep.to_json().unwrap()).unwrap(), rep);
    }

    #[test]
    fn rejects_bad_header() {
        assert!(ExperimentReport::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
