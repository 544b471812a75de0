//! Eigenvalues of a real nonsymmetric dense matrix.
//!
//! Balancing, reduction to upper Hessenberg form by stabilised elementary
//! similarity transforms, then the implicitly shifted Francis double-step QR
//! iteration with deflation on negligible subdiagonal entries.

use num_complex::Complex64;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

const MAX_ITS: usize = 60;

/// All eigenvalues of a square matrix, in no particular order.
pub fn dense_eigenvalues(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            n,
            a.n_cols()
        )));
    }
    if (0..n).any(|i| a.row(i).iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let mut h: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    balance(&mut h);
    hessenberg(&mut h);
    hqr(&mut h)
}

fn balance(a: &mut [Vec<f64>]) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let n = a.len();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                a[i].iter_mut().for_each(|v| *v *= g);
                a.iter_mut().for_each(|row| row[i] *= f);
            }
        }
    }
}

fn hessenberg(a: &mut [Vec<f64>]) {
    let n = a.len();
    for m in 1..n.saturating_sub(1) {
        let mut x: f64 = 0.0;
        let mut piv = m;
        for j in m..n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                piv = j;
            }
        }
        if piv != m {
            a.swap(piv, m);
            for row in a.iter_mut() {
                row.swap(piv, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..n {
                        let v = a[m][j];
                        a[i][j] -= y * v;
                    }
                    for row in a.iter_mut() {
                        let v = row[i];
                        row[m] += y * v;
                    }
                }
            }
        }
    }
    for i in 2..n {
        for j in 0..i - 1 {
            a[i][j] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

fn hqr(a: &mut [Vec<f64>]) -> Result<Vec<Complex64>> {
    let n = a.len();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let nu = nn as usize;
        let mut its = 0;
        loop {
            let mut l = nu;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= f64::EPSILON * s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                w[nu] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut ww = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + ww;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    w[nu - 1] = Complex64::new(x + z, 0.0);
                    w[nu] = w[nu - 1];
                    if z != 0.0 {
                        w[nu] = Complex64::new(x - ww / z, 0.0);
                    }
                } else {
                    w[nu - 1] = Complex64::new(x + p, -z);
                    w[nu] = Complex64::new(x + p, z);
                }
                nn -= 2;
                break;
            }
            if its == MAX_ITS {
                return Err(Error::EigenNoConvergence {
                    index: nu,
                    iterations: its,
                });
            }
            if its == 10 || its == 20 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a[i][i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                ww = -0.4375 * s * s;
            }
            its += 1;

            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - ww) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k + 1 != nu { a[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[k][j] + q * a[k + 1][j];
                        if k + 1 != nu {
                            pp += r * a[k + 2][j];
                            a[k + 2][j] -= pp * z;
                        }
                        a[k + 1][j] -= pp * y;
                        a[k][j] -= pp * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * a[i][k] + y * a[i][k + 1];
                        if k + 1 != nu {
                            pp += z * a[i][k + 2];
                            a[i][k + 2] -= pp * r;
                        }
                        a[i][k + 1] -= pp * q;
                        a[i][k] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn diagonal_and_triangular() {
        let a = DenseMatrix::from_rows(&[
            vec![3.0, 1.0, 4.0],
            vec![0.0, -1.0, 5.0],
            vec![0.0, 0.0, 2.0],
        ]);
        let e = sorted(dense_eigenvalues(&a).unwrap());
        for (got, want) in e.iter().zip([-1.0, 2.0, 3.0]) {
            assert!((got - Complex64::new(want, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let a = DenseMatrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        let e = sorted(dense_eigenvalues(&a).unwrap());
        assert!((e[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn companion_matrix_roots() {
        // (x-1)(x-2)(x-3)(x^2+1) = x^5 - 6x^4 + 12x^3 - 12x^2 + 11x - 6
        let c = [-6.0, 11.0, -12.0, 12.0, -6.0];
        let n = 5;
        let mut a = DenseMatrix::zeros(n, n);
        for i in 1..n {
            a[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            a[(i, n - 1)] = -c[i];
        }
        let e = sorted(dense_eigenvalues(&a).unwrap());
        let want = [
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
        ];
        for (g, w) in e.iter().zip(want) {
            assert!((g - w).norm() < 1e-9, "{g} vs {w}");
        }
    }

    #[test]
    fn trace_and_empty() {
        assert!(dense_eigenvalues(&DenseMatrix::zeros(0, 0)).unwrap().is_empty());
        let a = DenseMatrix::from_rows(&[vec![7.5]]);
        assert_eq!(dense_eigenvalues(&a).unwrap(), vec![Complex64::new(7.5, 0.0)]);
    }
}
