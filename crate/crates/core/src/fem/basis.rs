//! Lagrange P1/P2 shape functions on a physical triangle.
//!
//! Local P2 numbering: vertices 0..3, then edge midpoints 3 = (0,1),
//! 4 = (1,2), 5 = (2,0).

use crate::mesh::TriMesh;

/// Local vertex pairs of the three P2 edge nodes.
pub const P2_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

#[derive(Debug, Clone, Copy)]
pub struct Geometry {
    pub points: [[f64; 2]; 3],
    pub area: f64,
    pub grad_lambda: [[f64; 2]; 3],
}

impl Geometry {
    pub fn new(points: [[f64; 2]; 3]) -> Self {
        let [p0, p1, p2] = points;
        let twice = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let mut grad_lambda = [[0.0; 2]; 3];
        for (i, g) in grad_lambda.iter_mut().enumerate() {
            let pj = points[(i + 1) % 3];
            let pk = points[(i + 2) % 3];
            *g = [(pj[1] - pk[1]) / twice, (pk[0] - pj[0]) / twice];
        }
        Self {
            points,
            area: 0.5 * twice,
            grad_lambda,
        }
    }

    pub fn of(mesh: &TriMesh, t: usize) -> Self {
        Self::new(mesh.triangles[t].map(|v| mesh.vertices[v]))
    }

    pub fn point(&self, l: [f64; 3]) -> [f64; 2] {
        let p = &self.points;
        [
            l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
            l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
        ]
    }
}

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

pub fn p2_gradients(l: [f64; 3], g: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut out = [[0.0; 2]; 6];
    for i in 0..3 {
        let s = 4.0 * l[i] - 1.0;
        out[i] = [s * g[i][0], s * g[i][1]];
    }
    for (e, [i, j]) in P2_EDGES.iter().enumerate() {
        out[3 + e] = [
            4.0 * (l[*i] * g[*j][0] + l[*j] * g[*i][0]),
            4.0 * (l[*i] * g[*j][1] + l[*j] * g[*i][1]),
        ];
    }
    out
}
