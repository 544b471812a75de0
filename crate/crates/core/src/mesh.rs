//! Structured triangulations of the unit square and the backward-facing step.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    Lid,
    Wall,
    Inflow,
    Outflow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    /// Endpoints, oriented counterclockwise around the domain.
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Maximum edge length.
    pub h: f64,
    /// Lattice spacing `2^-r`, the value used to label table rows.
    pub spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub n_vertices: usize,
    pub n_triangles: usize,
    pub h: f64,
    pub area: f64,
}

/// Unique edges of a mesh plus, per triangle, the indices of its three edges
/// in local order (0,1), (1,2), (2,0).
#[derive(Debug, Clone)]
pub struct EdgeTable {
    pub edges: Vec<[usize; 2]>,
    pub triangle_edges: Vec<[usize; 3]>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl TriMesh {
    /// Builds a mesh from vertices and CCW triangles, extracting boundary edges
    /// (edges owned by a single triangle) and tagging them by their midpoint.
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        spacing: f64,
        tag: impl Fn([f64; 2]) -> BoundaryTag,
    ) -> Self {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &triangles {
            for l in 0..3 {
                *count.entry(edge_key(t[l], t[(l + 1) % 3])).or_default() += 1;
            }
        }
        let mut h: f64 = 0.0;
        let mut boundary_edges = Vec::new();
        for t in &triangles {
            for l in 0..3 {
                let (a, b) = (t[l], t[(l + 1) % 3]);
                let (pa, pb) = (vertices[a], vertices[b]);
                h = h.max((pa[0] - pb[0]).hypot(pa[1] - pb[1]));
                if count[&edge_key(a, b)] == 1 {
                    let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                    boundary_edges.push(BoundaryEdge {
                        vertices: [a, b],
                        tag: tag(mid),
                    });
                }
            }
        }
        Self {
            vertices,
            triangles,
            boundary_edges,
            h,
            spacing,
        }
    }

    /// Reassigns every boundary tag from the edge midpoint.
    pub fn retag(&mut self, tag: impl Fn([f64; 2]) -> BoundaryTag) {
        for e in &mut self.boundary_edges {
            let (pa, pb) = (self.vertices[e.vertices[0]], self.vertices[e.vertices[1]]);
            e.tag = tag([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn stats(&self) -> MeshStats {
        MeshStats {
            n_vertices: self.n_vertices(),
            n_triangles: self.n_triangles(),
            h: self.h,
            area: (0..self.n_triangles()).map(|t| self.signed_area(t)).sum(),
        }
    }

    /// Numbers edges in order of first appearance over the triangles.
    pub fn edge_table(&self) -> EdgeTable {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut triangle_edges = Vec::with_capacity(self.triangles.len());
        for t in &self.triangles {
            let mut te = [0; 3];
            for (l, slot) in te.iter_mut().enumerate() {
                let key = edge_key(t[l], t[(l + 1) % 3]);
                *slot = *index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
            }
            triangle_edges.push(te);
        }
        EdgeTable {
            edges,
            triangle_edges,
        }
    }

    /// Legacy ASCII VTK unstructured grid.
    pub fn write_vtk(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "stflow mesh")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(w, "POINTS {} double", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(w, "{} {} 0", v[0], v[1])?;
        }
        let nt = self.triangles.len();
        writeln!(w, "CELLS {} {}", nt, 4 * nt)?;
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "CELL_TYPES {nt}")?;
        for _ in 0..nt {
            writeln!(w, "5")?;
        }
        Ok(())
    }
}

pub fn mesh_stats(mesh: &TriMesh) -> MeshStats {
    mesh.stats()
}

fn split_square(v00: usize, v10: usize, v11: usize, v01: usize, out: &mut Vec<[usize; 3]>) {
    out.push([v00, v10, v11]);
    out.push([v00, v11, v01]);
}

fn on(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

/// `2^r x 2^r` squares on `[0,1]^2`, each cut along the SW-NE diagonal.
/// Top edge `Lid`, the rest `Wall`.
pub fn unit_square_mesh(r: u32) -> TriMesh {
    let n = 1usize << r;
    let s = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * s, j as f64 * s]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            split_square(id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), &mut triangles);
        }
    }
    TriMesh::from_parts(vertices, triangles, s, |m| {
        if on(m[1], 1.0) {
            BoundaryTag::Lid
        } else {
            BoundaryTag::Wall
        }
    })
}

/// L-shaped channel `[0,8]x[0,1] u [1,8]x[-1,0]` on a lattice of spacing
/// `2^-r`. Inflow at `x = 0`, outflow at `x = 8`, walls elsewhere.
pub fn backstep_mesh(r: u32) -> TriMesh {
    let m = 1usize << r;
    let s = 1.0 / m as f64;
    let (nx, ny) = (8 * m, 2 * m);
    // lattice (i, j) <-> (i s, j s - 1)
    let inside_cell = |i: usize, j: usize| i >= m || j >= m;
    let mut index = vec![usize::MAX; (nx + 1) * (ny + 1)];
    let mut vertices = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            if i >= m || j >= m {
                index[j * (nx + 1) + i] = vertices.len();
                vertices.push([i as f64 * s, j as f64 * s - 1.0]);
            }
        }
    }
    let id = |i: usize, j: usize| index[j * (nx + 1) + i];
    let mut triangles = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if inside_cell(i, j) {
                split_square(id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), &mut triangles);
            }
        }
    }
    TriMesh::from_parts(vertices, triangles, s, |p| {
        if on(p[0], 0.0) {
            BoundaryTag::Inflow
        } else if on(p[0], 8.0) {
            BoundaryTag::Outflow
        } else {
            BoundaryTag::Wall
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_counts() {
        for r in 0..5 {
            let m = unit_square_mesh(r);
            let n = 1usize << r;
            assert_eq!(m.n_vertices(), (n + 1) * (n + 1));
            assert_eq!(m.n_triangles(), 2 * n * n);
            assert_eq!(m.boundary_edges.len(), 4 * n);
            assert!((m.stats().area - 1.0).abs() < 1e-14);
            assert!((m.h - std::f64::consts::SQRT_2 / n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn lid_is_top_edge() {
        let m = unit_square_mesh(2);
        let lids: Vec<_> = m
            .boundary_edges
            .iter()
            .filter(|e| e.tag == BoundaryTag::Lid)
            .collect();
        assert_eq!(lids.len(), 4);
        for e in lids {
            assert!(e.vertices.iter().all(|&v| m.vertices[v][1] == 1.0));
        }
    }

    #[test]
    fn backstep_area_and_tags() {
        let m = backstep_mesh(0);
        assert!((m.stats().area - 15.0).abs() < 1e-12);
        let count = |t| m.boundary_edges.iter().filter(|e| e.tag == t).count();
        assert_eq!(count(BoundaryTag::Inflow), 1);
        assert_eq!(count(BoundaryTag::Outflow), 2);
        assert_eq!(m.backstep_corner_free(), true);
    }

    impl TriMesh {
        fn backstep_corner_free(&self) -> bool {
            self.vertices.iter().all(|v| !(v[0] < 1.0 && v[1] < 0.0))
        }
    }

    #[test]
    fn positive_orientation() {
        let m = backstep_mesh(1);
        assert!((0..m.n_triangles()).all(|t| m.signed_area(t) > 0.0));
    }

    #[test]
    fn edge_table_euler() {
        let m = unit_square_mesh(1);
        let e = m.edge_table();
        // V - E + F = 1 for a planar disc (F counts triangles only)
        assert_eq!(m.n_vertices() + m.n_triangles() - e.edges.len(), 1);
        assert_eq!(e.edges.len(), 16);
    }

    #[test]
    fn vtk_has_expected_sections() {
        let mut buf = Vec::new();
        unit_square_mesh(0).write_vtk(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("POINTS 4 double"));
        assert!(s.contains("CELLS 2 8"));
    }
}
