//! Quadrature rules on the triangle and on edges.

/// A point in barycentric coordinates with its weight relative to the
/// triangle area (weights sum to 1).
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

/// Symmetric 7-point rule, exact for polynomials of degree 5.
pub fn triangle_rule() -> [QuadPoint; 7] {
    let s15 = 15f64.sqrt();
    let a = (6.0 - s15) / 21.0;
    let b = (9.0 + 2.0 * s15) / 21.0;
    let c = (6.0 + s15) / 21.0;
    let d = (9.0 - 2.0 * s15) / 21.0;
    let wa = (155.0 - s15) / 1200.0;
    let wc = (155.0 + s15) / 1200.0;
    let third = 1.0 / 3.0;
    let p = |l: [f64; 3], weight| QuadPoint { bary: l, weight };
    [
        p([third, third, third], 9.0 / 40.0),
        p([a, a, b], wa),
        p([b, a, a], wa),
        p([a, b, a], wa),
        p([c, c, d], wc),
        p([d, c, c], wc),
        p([c, d, c], wc),
    ]
}

/// Three-point Gauss-Legendre rule on `[0, 1]`: `(s, weight)` pairs, weights
/// summing to 1. Exact for degree 5.
pub fn edge_rule() -> [(f64, f64); 3] {
    let r = (0.6f64).sqrt() / 2.0;
    [(0.5 - r, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + r, 5.0 / 18.0)]
}
