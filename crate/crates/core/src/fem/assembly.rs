//! Galerkin matrices and load vectors for the Taylor-Hood pair.

use std::sync::Arc;

use super::basis::{p2_gradients, p2_values, Geometry};
use super::quadrature::{edge_rule, triangle_rule};
use super::spaces::FESpaces;
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

/// Advecting velocity evaluated at quadrature points.
#[derive(Clone, Copy)]
pub enum Wind<'a> {
    Zero,
    Analytic(&'a dyn Fn([f64; 2]) -> [f64; 2]),
    /// Velocity DOF vector (length `N_u`) expanded in the P2 basis.
    Discrete(&'a [f64]),
}

impl std::fmt::Debug for Wind<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Wind::Zero => write!(f, "Zero"),
            Wind::Analytic(_) => write!(f, "Analytic"),
            Wind::Discrete(u) => write!(f, "Discrete({} dofs)", u.len()),
        }
    }
}

impl Wind<'_> {
    pub fn is_zero(&self) -> bool {
        matches!(self, Wind::Zero)
    }

    fn eval(&self, spaces: &FESpaces, cell: usize, l: [f64; 3], x: [f64; 2]) -> [f64; 2] {
        match self {
            Wind::Zero => [0.0, 0.0],
            Wind::Analytic(f) => f(x),
            Wind::Discrete(u) => {
                let nn = spaces.n_nodes;
                let phi = p2_values(l);
                let nodes = &spaces.cell_nodes[cell];
                let mut w = [0.0; 2];
                for (a, &n) in nodes.iter().enumerate() {
                    w[0] += phi[a] * u[n];
                    w[1] += phi[a] * u[nn + n];
                }
                w
            }
        }
    }
}

fn assemble_p2(spaces: &FESpaces, local: impl Fn(usize, &Geometry) -> [[f64; 6]; 6]) -> SparseMatrix {
    let n = spaces.n_nodes;
    let mut trip = Vec::with_capacity(36 * spaces.cell_nodes.len());
    for (t, nodes) in spaces.cell_nodes.iter().enumerate() {
        let geo = Geometry::of(&spaces.mesh, t);
        let k = local(t, &geo);
        for a in 0..6 {
            for b in 0..6 {
                trip.push((nodes[a], nodes[b], k[a][b]));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &trip).expect("P2 assembly produces valid triplets")
}

fn assemble_p1(spaces: &FESpaces, local: impl Fn(usize, &Geometry) -> [[f64; 3]; 3]) -> SparseMatrix {
    let n = spaces.n_vertices;
    let mut trip = Vec::with_capacity(9 * spaces.cell_nodes.len());
    for (t, tri) in spaces.mesh.triangles.iter().enumerate() {
        let geo = Geometry::of(&spaces.mesh, t);
        let k = local(t, &geo);
        for a in 0..3 {
            for b in 0..3 {
                trip.push((tri[a], tri[b], k[a][b]));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, &trip).expect("P1 assembly produces valid triplets")
}

/// Scalar P2 mass matrix.
pub fn p2_mass(spaces: &FESpaces) -> SparseMatrix {
    assemble_p2(spaces, |_, geo| {
        let mut k = [[0.0; 6]; 6];
        for q in triangle_rule() {
            let phi = p2_values(q.bary);
            let w = q.weight * geo.area;
            for a in 0..6 {
                for b in 0..6 {
                    k[a][b] += w * phi[a] * phi[b];
                }
            }
        }
        k
    })
}

/// Scalar P2 stiffness (Laplacian) matrix.
pub fn p2_stiffness(spaces: &FESpaces) -> SparseMatrix {
    assemble_p2(spaces, |_, geo| {
        let mut k = [[0.0; 6]; 6];
        for q in triangle_rule() {
            let g = p2_gradients(q.bary, &geo.grad_lambda);
            let w = q.weight * geo.area;
            for a in 0..6 {
                for b in 0..6 {
                    k[a][b] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
        }
        k
    })
}

/// Scalar P2 advection matrix `W[m][n] = int (w . grad phi_n) phi_m`.
pub fn p2_advection(spaces: &FESpaces, wind: &Wind) -> SparseMatrix {
    if wind.is_zero() {
        return SparseMatrix::zeros(spaces.n_nodes, spaces.n_nodes);
    }
    assemble_p2(spaces, |t, geo| {
        let mut k = [[0.0; 6]; 6];
        for q in triangle_rule() {
            let phi = p2_values(q.bary);
            let g = p2_gradients(q.bary, &geo.grad_lambda);
            let wv = wind.eval(spaces, t, q.bary, geo.point(q.bary));
            let w = q.weight * geo.area;
            for b in 0..6 {
                let adv = wv[0] * g[b][0] + wv[1] * g[b][1];
                for a in 0..6 {
                    k[a][b] += w * adv * phi[a];
                }
            }
        }
        k
    })
}

pub fn assemble_velocity_mass(spaces: &FESpaces) -> SparseMatrix {
    p2_mass(spaces).block_diag2()
}

pub fn assemble_velocity_stiffness(spaces: &FESpaces) -> SparseMatrix {
    p2_stiffness(spaces).block_diag2()
}

pub fn assemble_velocity_advection(spaces: &FESpaces, wind: &Wind) -> SparseMatrix {
    p2_advection(spaces, wind).block_diag2()
}

/// Negative divergence `B[m][n] = -int psi_m div phi_n`, size `N_p x N_u`.
pub fn assemble_divergence(spaces: &FESpaces) -> SparseMatrix {
    let nn = spaces.n_nodes;
    let mut trip = Vec::with_capacity(36 * spaces.cell_nodes.len());
    for (t, nodes) in spaces.cell_nodes.iter().enumerate() {
        let geo = Geometry::of(&spaces.mesh, t);
        let tri = spaces.mesh.triangles[t];
        let mut k = [[[0.0; 6]; 3]; 2];
        for q in triangle_rule() {
            let g = p2_gradients(q.bary, &geo.grad_lambda);
            let w = q.weight * geo.area;
            for a in 0..3 {
                for b in 0..6 {
                    for c in 0..2 {
                        k[c][a][b] -= w * q.bary[a] * g[b][c];
                    }
                }
            }
        }
        for c in 0..2 {
            for a in 0..3 {
                for b in 0..6 {
                    trip.push((tri[a], c * nn + nodes[b], k[c][a][b]));
                }
            }
        }
    }
    SparseMatrix::from_triplets(spaces.n_p(), spaces.n_u(), &trip)
        .expect("divergence assembly produces valid triplets")
}

pub fn assemble_pressure_mass(spaces: &FESpaces) -> SparseMatrix {
    assemble_p1(spaces, |_, geo| {
        let mut k = [[geo.area / 12.0; 3]; 3];
        for (i, row) in k.iter_mut().enumerate() {
            row[i] = geo.area / 6.0;
        }
        k
    })
}

/// P1 Laplacian with natural boundary conditions everywhere.
pub fn assemble_pressure_laplacian(spaces: &FESpaces) -> SparseMatrix {
    assemble_p1(spaces, |_, geo| {
        let g = &geo.grad_lambda;
        let mut k = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                k[a][b] = geo.area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
            }
        }
        k
    })
}

pub fn assemble_pressure_advection(spaces: &FESpaces, wind: &Wind) -> SparseMatrix {
    if wind.is_zero() {
        return SparseMatrix::zeros(spaces.n_p(), spaces.n_p());
    }
    assemble_p1(spaces, |t, geo| {
        let g = &geo.grad_lambda;
        let mut k = [[0.0; 3]; 3];
        for q in triangle_rule() {
            let wv = wind.eval(spaces, t, q.bary, geo.point(q.bary));
            let w = q.weight * geo.area;
            for b in 0..3 {
                let adv = wv[0] * g[b][0] + wv[1] * g[b][1];
                for a in 0..3 {
                    k[a][b] += w * adv * q.bary[a];
                }
            }
        }
        k
    })
}

#[derive(Debug, Clone)]
pub struct PressureOperators {
    pub m_p: SparseMatrix,
    /// Laplacian with homogeneous Dirichlet rows and columns at outflow
    /// vertices (identity there) and natural conditions elsewhere.
    pub a_p_tilde: SparseMatrix,
    pub w_p: SparseMatrix,
}

pub fn assemble_pressure_operators(spaces: &FESpaces, wind: &Wind) -> PressureOperators {
    PressureOperators {
        m_p: assemble_pressure_mass(spaces),
        a_p_tilde: assemble_pressure_laplacian(spaces).with_identity_rows_cols(&spaces.pressure_dirichlet),
        w_p: assemble_pressure_advection(spaces, wind),
    }
}

/// Velocity load `int f . phi + int_{outflow} g . phi ds`.
pub fn assemble_load(
    spaces: &FESpaces,
    forcing: impl Fn([f64; 2]) -> [f64; 2],
    neumann: Option<&dyn Fn([f64; 2]) -> [f64; 2]>,
) -> Vec<f64> {
    let nn = spaces.n_nodes;
    let mut rhs = vec![0.0; spaces.n_u()];
    for (t, nodes) in spaces.cell_nodes.iter().enumerate() {
        let geo = Geometry::of(&spaces.mesh, t);
        for q in triangle_rule() {
            let f = forcing(geo.point(q.bary));
            if f == [0.0, 0.0] {
                continue;
            }
            let phi = p2_values(q.bary);
            let w = q.weight * geo.area;
            for (a, &n) in nodes.iter().enumerate() {
                rhs[n] += w * f[0] * phi[a];
                rhs[nn + n] += w * f[1] * phi[a];
            }
        }
    }
    if let Some(g) = neumann {
        let v = &spaces.node_coords;
        for &[a, b, m] in &spaces.neumann_edges {
            let (pa, pb) = (v[a], v[b]);
            let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
            for (s, w) in edge_rule() {
                let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                let gv = g(x);
                let phi = [(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)];
                for (node, ph) in [a, b, m].into_iter().zip(phi) {
                    rhs[node] += w * len * gv[0] * ph;
                    rhs[nn + node] += w * len * gv[1] * ph;
                }
            }
        }
    }
    rhs
}

/// All spatial operators of a problem over `n_t` uniform time steps.
///
/// Time-invariant blocks are shared: every step with zero wind points at the
/// same `W` and `F` matrices.
#[derive(Debug, Clone)]
pub struct SpatialOperators {
    pub dt: f64,
    pub mu: f64,
    pub m_u: Arc<SparseMatrix>,
    pub a_u: Arc<SparseMatrix>,
    pub b: Arc<SparseMatrix>,
    pub m_p: Arc<SparseMatrix>,
    pub a_p_tilde: Arc<SparseMatrix>,
    pub w_u: Vec<Arc<SparseMatrix>>,
    pub w_p: Vec<Arc<SparseMatrix>>,
    /// `M_u/dt + W_u[k] + mu A_u`
    pub f_u: Vec<Arc<SparseMatrix>>,
    /// `M_p/dt + W_p[k] + mu A_p_tilde`
    pub f_p: Vec<Arc<SparseMatrix>>,
}

impl SpatialOperators {
    /// `winds[k]` advects step `k + 1`; its length sets the step count.
    pub fn assemble(spaces: &FESpaces, dt: f64, mu: f64, winds: &[Wind]) -> Result<Self> {
        if !(dt > 0.0) || !(mu > 0.0) {
            return Err(Error::InvalidArgument(format!("dt = {dt}, mu = {mu}")));
        }
        let pressure = assemble_pressure_operators(spaces, &Wind::Zero);
        let base = Self {
            dt,
            mu,
            m_u: Arc::new(assemble_velocity_mass(spaces)),
            a_u: Arc::new(assemble_velocity_stiffness(spaces)),
            b: Arc::new(assemble_divergence(spaces)),
            m_p: Arc::new(pressure.m_p),
            a_p_tilde: Arc::new(pressure.a_p_tilde),
            w_u: Vec::new(),
            w_p: Vec::new(),
            f_u: Vec::new(),
            f_p: Vec::new(),
        };
        base.with_winds(spaces, winds)
    }

    /// Same static operators, new advection fields.
    pub fn with_winds(&self, spaces: &FESpaces, winds: &[Wind]) -> Result<Self> {
        if winds.is_empty() {
            return Err(Error::InvalidArgument("at least one time step required".into()));
        }
        let mut out = Self {
            w_u: Vec::with_capacity(winds.len()),
            w_p: Vec::with_capacity(winds.len()),
            f_u: Vec::with_capacity(winds.len()),
            f_p: Vec::with_capacity(winds.len()),
            ..self.clone()
        };
        let mut zero_blocks: Option<[Arc<SparseMatrix>; 4]> = None;
        for wind in winds {
            let blocks = match (wind.is_zero(), &zero_blocks) {
                (true, Some(z)) => z.clone(),
                _ => {
                    let w_u = assemble_velocity_advection(spaces, wind);
                    let w_p = assemble_pressure_advection(spaces, wind);
                    let f_u = SparseMatrix::linear_combination(&[
                        (1.0 / self.dt, &self.m_u),
                        (1.0, &w_u),
                        (self.mu, &self.a_u),
                    ])?;
                    let f_p = SparseMatrix::linear_combination(&[
                        (1.0 / self.dt, &self.m_p),
                        (1.0, &w_p),
                        (self.mu, &self.a_p_tilde),
                    ])?;
                    let z = [w_u, w_p, f_u, f_p].map(Arc::new);
                    if wind.is_zero() {
                        zero_blocks = Some(z.clone());
                    }
                    z
                }
            };
            let [w_u, w_p, f_u, f_p] = blocks;
            out.w_u.push(w_u);
            out.w_p.push(w_p);
            out.f_u.push(f_u);
            out.f_p.push(f_p);
        }
        Ok(out)
    }

    pub fn n_t(&self) -> usize {
        self.f_u.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_spaces;
    use crate::mesh::unit_square_mesh;

    #[test]
    fn mass_entries_sum_to_twice_area() {
        let s = build_spaces(&unit_square_mesh(2));
        let m = assemble_velocity_mass(&s);
        assert!((m.values().iter().sum::<f64>() - 2.0).abs() < 1e-13);
        let mp = assemble_pressure_mass(&s);
        assert!((mp.values().iter().sum::<f64>() - 1.0).abs() < 1e-13);
        assert!(m.is_symmetric(1e-15));
    }

    #[test]
    fn stiffness_kills_constants() {
        let s = build_spaces(&unit_square_mesh(2));
        let a = assemble_velocity_stiffness(&s);
        let one = s.interpolate_velocity(|_| [1.0, -2.0]);
        assert!(a.mul_vec(&one).iter().all(|v| v.abs() < 1e-12));
        let b = assemble_divergence(&s);
        assert!(b.mul_vec(&one).iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn zero_wind_steps_share_blocks() {
        let s = build_spaces(&unit_square_mesh(1));
        let ops = SpatialOperators::assemble(&s, 0.5, 1.0, &[Wind::Zero; 3]).unwrap();
        assert!(Arc::ptr_eq(&ops.f_u[0], &ops.f_u[2]));
        assert_eq!(ops.n_t(), 3);
    }
}
