//! Chebyshev semi-iteration for symmetric positive definite systems.

use super::sparse::SparseMatrix;

/// Runs `iterations` Chebyshev steps on `A x = b` from `x = 0`.
///
/// `bounds = (lambda_min, lambda_max)` must enclose the spectrum of `A`, or of
/// `D^{-1} A` when `jacobi` is set (`D` the diagonal of `A`). The error after
/// `k` steps is `p_k(D^{-1}A) e_0` with `p_k` the scaled Chebyshev polynomial
/// of the interval, so the result is a fixed linear function of `b`.
pub fn chebyshev_solve(
    a: &SparseMatrix,
    b: &[f64],
    iterations: usize,
    bounds: (f64, f64),
    jacobi: bool,
) -> Vec<f64> {
    let n = b.len();
    assert_eq!(a.n_rows(), n);
    let (lmin, lmax) = bounds;
    assert!(
        lmin > 0.0 && lmin <= lmax,
        "Chebyshev bounds must satisfy 0 < min <= max"
    );
    let mut x = vec![0.0; n];
    if iterations == 0 {
        return x;
    }
    let inv_diag: Option<Vec<f64>> = jacobi.then(|| a.diagonal().iter().map(|d| 1.0 / d).collect());
    let precondition = |r: &[f64], z: &mut [f64]| match &inv_diag {
        Some(d) => z.iter_mut().zip(r).zip(d).for_each(|((zi, ri), di)| *zi = ri * di),
        None => z.copy_from_slice(r),
    };

    let theta = 0.5 * (lmax + lmin);
    let delta = 0.5 * (lmax - lmin);
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut ad = vec![0.0; n];
    precondition(&r, &mut z);

    // one-point spectrum: the Chebyshev recurrence degenerates to exact
    // Richardson with step 1/theta
    if delta <= f64::EPSILON * theta {
        for it in 0..iterations {
            if it > 0 {
                precondition(&r, &mut z);
            }
            let d: Vec<f64> = z.iter().map(|v| v / theta).collect();
            x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += di);
            a.mul_vec_into(&d, &mut ad);
            r.iter_mut().zip(&ad).for_each(|(ri, ai)| *ri -= ai);
        }
        return x;
    }

    let sigma = theta / delta;
    let mut rho = 1.0 / sigma;
    let mut d: Vec<f64> = z.iter().map(|v| v / theta).collect();
    for it in 0..iterations {
        if it > 0 {
            let rho_next = 1.0 / (2.0 * sigma - rho);
            precondition(&r, &mut z);
            let c1 = rho_next * rho;
            let c2 = 2.0 * rho_next / delta;
            d.iter_mut().zip(&z).for_each(|(di, zi)| *di = c1 * *di + c2 * zi);
            rho = rho_next;
        }
        x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += di);
        a.mul_vec_into(&d, &mut ad);
        r.iter_mut().zip(&ad).for_each(|(ri, ai)| *ri -= ai);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> SparseMatrix {
        let t: Vec<_> = values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        SparseMatrix::from_triplets(values.len(), values.len(), &t).unwrap()
    }

    #[test]
    fn identity_with_point_bounds_is_exact_in_one_step() {
        let a = SparseMatrix::identity(4);
        let b = [1.0, -2.0, 3.0, 0.25];
        assert_eq!(chebyshev_solve(&a, &b, 1, (1.0, 1.0), false), b.to_vec());
    }

    #[test]
    fn zero_iterations_returns_zero() {
        let a = diag(&[1.0, 2.0]);
        assert_eq!(chebyshev_solve(&a, &[1.0, 1.0], 0, (1.0, 2.0), false), vec![0.0, 0.0]);
    }

    #[test]
    fn two_point_spectrum_error_matches_chebyshev_polynomial() {
        // e_k = p_k(lambda) e_0 with p_k(lmin) = 1/T_k(sigma), p_k(lmax) = (-1)^k/T_k(sigma)
        let (lmin, lmax) = (0.5, 2.0);
        let a = diag(&[lmin, lmax]);
        let b = [1.0, 1.0];
        let exact = [1.0 / lmin, 1.0 / lmax];
        let sigma = (lmax + lmin) / (lmax - lmin);
        for k in 1..=4usize {
            let t_k = (k as f64 * sigma.acosh()).cosh();
            let x = chebyshev_solve(&a, &b, k, (lmin, lmax), false);
            let e0 = (exact[0] - x[0]) / exact[0];
            let e1 = (exact[1] - x[1]) / exact[1];
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((e0 - 1.0 / t_k).abs() < 1e-14, "k={k}: {e0} vs {}", 1.0 / t_k);
            assert!((e1 - sign / t_k).abs() < 1e-14, "k={k}: {e1}");
        }
    }

    #[test]
    fn jacobi_scaling_uses_diagonal() {
        // D^{-1}A = I, so one step with bounds [1,1] is exact
        let a = diag(&[3.0, 5.0, 7.0]);
        let x = chebyshev_solve(&a, &[3.0, 10.0, 21.0], 1, (1.0, 1.0), true);
        for (xi, e) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((xi - e).abs() < 1e-15);
        }
    }
}
