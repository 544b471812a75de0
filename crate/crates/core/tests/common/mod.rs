#![allow(dead_code)]

use faer::prelude::*;
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stflow::{SparseMatrix, SpaceTimeSystem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b).max(f64::MIN_POSITIVE)
}

pub fn dense(a: &SparseMatrix) -> Mat<f64> {
    let mut m = Mat::zeros(a.n_rows(), a.n_cols());
    for (i, j, v) in a.triplets() {
        m[(i, j)] += v;
    }
    m
}

pub fn mat_vec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

pub fn solve(a: &Mat<f64>, b: &[f64]) -> Vec<f64> {
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = a.partial_piv_lu().solve(&rhs);
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}

fn project_out_constants(x: &mut [f64]) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= m);
}

/// Space-time operator built from the raw (non-eliminated) spatial
/// operators: Dirichlet rows and columns of `F_u` become identity, those of
/// `M_u/dt` and the Dirichlet columns of `B` are dropped.
pub fn dense_spacetime_operator(sys: &SpaceTimeSystem) -> Mat<f64> {
    let (n_u, n_p, n_t) = (sys.n_u, sys.n_p, sys.n_t);
    let mask = sys.velocity_mask();
    let n = sys.dim();
    let mut a = Mat::zeros(n, n);
    let m = dense(&sys.ops.m_u);
    let b = dense(&sys.ops.b);
    for k in 0..n_t {
        let f = dense(&sys.ops.f_u[k]);
        let (ru, rp) = (k * n_u, n_u * n_t + k * n_p);
        for i in 0..n_u {
            for j in 0..n_u {
                a[(ru + i, ru + j)] = if mask[i] || mask[j] {
                    if i == j { 1.0 } else { 0.0 }
                } else {
                    f[(i, j)]
                };
                if k > 0 && !mask[i] && !mask[j] {
                    a[(ru + i, ru - n_u + j)] = -m[(i, j)] / sys.dt;
                }
            }
        }
        for i in 0..n_p {
            for j in 0..n_u {
                if !mask[j] {
                    a[(rp + i, ru + j)] = b[(i, j)];
                    a[(ru + j, rp + i)] = b[(i, j)];
                }
            }
        }
    }
    a
}

/// `M_p^{-1} F_p A_p^+` with the block bidiagonal `F_p` (diagonal `F_p[k]`,
/// subdiagonal `-M_p/dt`); for enclosed flow every input block is projected
/// onto the complement of the constants and `A_p^+` is the pseudo-inverse.
pub fn dense_schur_inverse(sys: &SpaceTimeSystem, r: &[f64]) -> Vec<f64> {
    let (n_p, n_t) = (sys.n_p, sys.n_t);
    let mut a = dense(&sys.ops.a_p_tilde);
    if sys.enclosed {
        let c = 1.0 / n_p as f64;
        for i in 0..n_p {
            for j in 0..n_p {
                a[(i, j)] += c;
            }
        }
    }
    let m = dense(&sys.ops.m_p);
    let z: Vec<Vec<f64>> = r
        .chunks(n_p)
        .map(|blk| {
            let mut blk = blk.to_vec();
            if sys.enclosed {
                project_out_constants(&mut blk);
            }
            solve(&a, &blk)
        })
        .collect();
    let mut out = Vec::with_capacity(r.len());
    for k in 0..n_t {
        let mut w = mat_vec(&dense(&sys.ops.f_p[k]), &z[k]);
        if k > 0 {
            let mz = mat_vec(&m, &z[k - 1]);
            w.iter_mut().zip(&mz).for_each(|(wi, mi)| *wi -= mi / sys.dt);
        }
        out.extend(solve(&m, &w));
    }
    out
}
