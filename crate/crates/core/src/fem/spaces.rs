//! Taylor-Hood P2/P1 degree-of-freedom layout.

use crate::mesh::{BoundaryTag, TriMesh};

/// Velocity: vector P2, component-major (`c * n_nodes + node`), nodes being
/// mesh vertices followed by edge midpoints. Pressure: P1 on vertices.
#[derive(Debug, Clone)]
pub struct FESpaces {
    pub mesh: TriMesh,
    pub n_vertices: usize,
    pub n_nodes: usize,
    pub node_coords: Vec<[f64; 2]>,
    pub cell_nodes: Vec<[usize; 6]>,
    /// Per velocity DOF.
    pub velocity_dirichlet: Vec<bool>,
    /// Per pressure DOF: vertices on outflow edges.
    pub pressure_dirichlet: Vec<bool>,
    /// Outflow edges as (start vertex, end vertex, midpoint node).
    pub neumann_edges: Vec<[usize; 3]>,
}

impl FESpaces {
    pub fn n_u(&self) -> usize {
        2 * self.n_nodes
    }

    pub fn n_p(&self) -> usize {
        self.n_vertices
    }

    /// No pressure Dirichlet DOF: the pressure is fixed only up to a constant.
    pub fn enclosed(&self) -> bool {
        !self.pressure_dirichlet.iter().any(|&d| d)
    }

    pub fn interpolate_velocity(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let mut u = vec![0.0; self.n_u()];
        for (n, &x) in self.node_coords.iter().enumerate() {
            let v = f(x);
            u[n] = v[0];
            u[self.n_nodes + n] = v[1];
        }
        u
    }

    pub fn interpolate_pressure(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.node_coords[..self.n_vertices].iter().map(|&x| f(x)).collect()
    }

    /// Interpolant of `f` on Dirichlet DOFs, zero elsewhere.
    pub fn dirichlet_values(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let mut g = self.interpolate_velocity(f);
        g.iter_mut()
            .zip(&self.velocity_dirichlet)
            .for_each(|(v, &d)| {
                if !d {
                    *v = 0.0
                }
            });
        g
    }
}

/// Every boundary edge except `Outflow` carries a velocity Dirichlet
/// condition; `Outflow` is natural for velocity and Dirichlet for the
/// pressure Laplacian.
pub fn build_spaces(mesh: &TriMesh) -> FESpaces {
    let edges = mesh.edge_table();
    let nv = mesh.n_vertices();
    let n_nodes = nv + edges.edges.len();
    let mut node_coords = mesh.vertices.clone();
    for [a, b] in &edges.edges {
        let (pa, pb) = (mesh.vertices[*a], mesh.vertices[*b]);
        node_coords.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
    }
    let cell_nodes: Vec<[usize; 6]> = mesh
        .triangles
        .iter()
        .zip(&edges.triangle_edges)
        .map(|(t, e)| [t[0], t[1], t[2], nv + e[0], nv + e[1], nv + e[2]])
        .collect();

    let mut edge_index = std::collections::HashMap::new();
    for (i, [a, b]) in edges.edges.iter().enumerate() {
        edge_index.insert((*a, *b), i);
    }
    let mid = |a: usize, b: usize| nv + edge_index[&(a.min(b), a.max(b))];

    let mut node_dirichlet = vec![false; n_nodes];
    let mut pressure_dirichlet = vec![false; nv];
    let mut neumann_edges = Vec::new();
    for e in &mesh.boundary_edges {
        let [a, b] = e.vertices;
        if e.tag == BoundaryTag::Outflow {
            pressure_dirichlet[a] = true;
            pressure_dirichlet[b] = true;
            neumann_edges.push([a, b, mid(a, b)]);
        } else {
            for n in [a, b, mid(a, b)] {
                node_dirichlet[n] = true;
            }
        }
    }
    let mut velocity_dirichlet = node_dirichlet.clone();
    velocity_dirichlet.extend_from_slice(&node_dirichlet);

    FESpaces {
        mesh: mesh.clone(),
        n_vertices: nv,
        n_nodes,
        node_coords,
        cell_nodes,
        velocity_dirichlet,
        pressure_dirichlet,
        neumann_edges,
    }
}
