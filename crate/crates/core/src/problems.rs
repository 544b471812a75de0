//! The four model flows: lid-driven cavity, Poiseuille channel, backward
//! facing step and double-glazing (recirculating wind).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{backstep_mesh, unit_square_mesh, BoundaryTag, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemId {
    Cavity,
    Poiseuille,
    #[serde(rename = "backstep")]
    BackStep,
    #[serde(rename = "glazing")]
    DoubleGlazing,
}

impl ProblemId {
    pub const ALL: [ProblemId; 4] = [
        ProblemId::Cavity,
        ProblemId::Poiseuille,
        ProblemId::BackStep,
        ProblemId::DoubleGlazing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Cavity => "cavity",
            ProblemId::Poiseuille => "poiseuille",
            ProblemId::BackStep => "backstep",
            ProblemId::DoubleGlazing => "glazing",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown problem '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub id: ProblemId,
    /// Peclet number; zero except for the double-glazing flow.
    pub pe: f64,
    pub mu: f64,
    pub t0: f64,
    pub t_end: f64,
    /// Poiseuille only: use the time-independent pressure `8(1-x)` instead of
    /// the consistent `8t(1-x)`.
    pub steady_pressure: bool,
    /// Scales all Dirichlet data.
    pub amplitude: f64,
}

pub fn make_problem(id: ProblemId, pe: Option<f64>) -> Result<ProblemSpec> {
    let pe = match (id, pe) {
        (ProblemId::DoubleGlazing, Some(pe)) if pe >= 0.0 && pe.is_finite() => pe,
        (ProblemId::DoubleGlazing, Some(pe)) => {
            return Err(Error::InvalidArgument(format!("Peclet number {pe} must be >= 0")))
        }
        (ProblemId::DoubleGlazing, None) => {
            return Err(Error::InvalidArgument("the glazing problem needs a Peclet number".into()))
        }
        (_, Some(_)) => {
            return Err(Error::InvalidArgument(format!("{id} takes no Peclet number")))
        }
        (_, None) => 0.0,
    };
    Ok(ProblemSpec {
        id,
        pe,
        mu: 1.0,
        t0: 0.0,
        t_end: 1.0,
        steady_pressure: false,
        amplitude: 1.0,
    })
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

impl ProblemSpec {
    pub fn with_steady_pressure(mut self, on: bool) -> Self {
        self.steady_pressure = on;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Mesh at refinement `r` with this problem's boundary tags.
    pub fn mesh(&self, r: u32) -> TriMesh {
        match self.id {
            ProblemId::Cavity | ProblemId::DoubleGlazing => unit_square_mesh(r),
            ProblemId::Poiseuille => {
                let mut m = unit_square_mesh(r);
                m.retag(|p| {
                    if near(p[0], 0.0) {
                        BoundaryTag::Inflow
                    } else if near(p[0], 1.0) {
                        BoundaryTag::Outflow
                    } else {
                        BoundaryTag::Wall
                    }
                });
                m
            }
            ProblemId::BackStep => backstep_mesh(r),
        }
    }

    /// No outflow boundary: pressure determined up to a constant.
    pub fn enclosed(&self) -> bool {
        matches!(self.id, ProblemId::Cavity | ProblemId::DoubleGlazing)
    }

    /// Velocity prescribed on the Dirichlet boundary. The glazing flow shares
    /// the cavity lid.
    pub fn dirichlet(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let a = self.amplitude;
        match self.id {
            ProblemId::Cavity | ProblemId::DoubleGlazing if near(x[1], 1.0) => {
                let s = x[0];
                [a * 8.0 * t * s * (1.0 - s) * (2.0 * s * s - 2.0 * s + 1.0), 0.0]
            }
            ProblemId::Poiseuille => [a * 4.0 * t * x[1] * (1.0 - x[1]), 0.0],
            ProblemId::BackStep if near(x[0], 0.0) => [a * 4.0 * t * x[1] * (1.0 - x[1]), 0.0],
            _ => [0.0, 0.0],
        }
    }

    pub fn forcing(&self, x: [f64; 2], _t: f64) -> [f64; 2] {
        match self.id {
            ProblemId::Poiseuille => [4.0 * x[1] * (1.0 - x[1]), 0.0],
            _ => [0.0, 0.0],
        }
    }

    /// Traction on the outflow boundary.
    pub fn neumann(&self, _x: [f64; 2], _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }

    pub fn has_wind(&self) -> bool {
        self.id == ProblemId::DoubleGlazing && self.pe != 0.0
    }

    /// Prescribed advecting field of the Oseen problems.
    pub fn wind(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        if !self.has_wind() {
            return [0.0, 0.0];
        }
        let s = 2.0 * t * self.mu * self.pe;
        let (ax, ay) = (2.0 * x[0] - 1.0, 2.0 * x[1] - 1.0);
        [-s * ay * ax * ax, s * ax * ay * ay]
    }

    /// Analytic velocity and pressure where known (Poiseuille only).
    pub fn exact_solution(&self, x: [f64; 2], t: f64) -> Option<([f64; 2], f64)> {
        if self.id != ProblemId::Poiseuille {
            return None;
        }
        let u = [4.0 * t * x[1] * (1.0 - x[1]), 0.0];
        let scale = if self.steady_pressure { 1.0 } else { t };
        Some((u, 8.0 * scale * (1.0 - x[0])))
    }

    /// `dx * Pe / L` with unit length scale.
    pub fn grid_peclet(&self, dx: f64) -> f64 {
        dx * self.pe
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lid_midpoint_speed() {
        let p = make_problem(ProblemId::Cavity, None).unwrap();
        assert_eq!(p.dirichlet([0.5, 1.0], 1.0), [1.0, 0.0]);
    }

    #[test]
    fn data_vanishes_at_start() {
        for id in ProblemId::ALL {
            let pe = (id == ProblemId::DoubleGlazing).then_some(10.0);
            let p = make_problem(id, pe).unwrap();
            for x in [[0.0, 0.3], [0.5, 1.0], [0.2, 0.0], [1.0, 0.7]] {
                assert_eq!(p.dirichlet(x, 0.0), [0.0, 0.0]);
                assert_eq!(p.wind(x, 0.0), [0.0, 0.0]);
            }
        }
    }

    #[test]
    fn glazing_wind_vanishes_at_centre() {
        let p = make_problem(ProblemId::DoubleGlazing, Some(100.0)).unwrap();
        assert_eq!(p.wind([0.5, 0.5], 1.0), [0.0, 0.0]);
    }

    #[test]
    fn peclet_argument_rules() {
        assert!(make_problem(ProblemId::DoubleGlazing, None).is_err());
        assert!(make_problem(ProblemId::Cavity, Some(1.0)).is_err());
        assert!("nope".parse::<ProblemId>().is_err());
        assert_eq!("glazing".parse::<ProblemId>().unwrap(), ProblemId::DoubleGlazing);
    }

    #[test]
    fn poiseuille_exact_values() {
        let p = make_problem(ProblemId::Poiseuille, None).unwrap();
        let (u, _) = p.exact_solution([0.3, 0.5], 1.0).unwrap();
        assert_eq!(u, [1.0, 0.0]);
        let (_, p0) = p.exact_solution([0.0, 0.2], 1.0).unwrap();
        let (_, p1) = p.exact_solution([1.0, 0.2], 1.0).unwrap();
        assert_eq!(p0 - p1, 8.0);
    }

    #[test]
    fn grid_peclet_examples() {
        let p = make_problem(ProblemId::DoubleGlazing, Some(16.0)).unwrap();
        assert_eq!(p.grid_peclet(1.0 / 16.0), 1.0);
        let p = make_problem(ProblemId::DoubleGlazing, Some(256.0)).unwrap();
        assert_eq!(p.grid_peclet(1.0 / 64.0), 4.0);
        assert_eq!(make_problem(ProblemId::Cavity, None).unwrap().grid_peclet(0.25), 0.0);
    }
}
