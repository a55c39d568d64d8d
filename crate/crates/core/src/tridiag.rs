//! Symmetric tridiagonal kernels.

/// Solves `T x = rhs` for symmetric tridiagonal `T` (Thomas algorithm, no pivoting).
///
/// `off[i]` couples rows `i` and `i + 1`. Returns `None` on a zero pivot.
pub fn solve_symmetric(diag: &[f64], off: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    debug_assert_eq!(off.len() + 1, n.max(1));
    if n == 0 {
        return Some(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 || !piv.is_finite() {
        return None;
    }
    x[0] = rhs[0] / piv;
    for i in 1..n {
        c[i - 1] = off[i - 1] / piv;
        piv = diag[i] - off[i - 1] * c[i - 1];
        if piv == 0.0 || !piv.is_finite() {
            return None;
        }
        x[i] = (rhs[i] - off[i - 1] * x[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Some(x)
}

/// Number of negative pivots of the `LDL^T` factorization of `T`, i.e. its eigenvalues below zero.
pub fn negative_pivots(diag: &[f64], off: &[f64]) -> usize {
    let mut count = 0;
    let mut piv = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        piv = diag[i] - coupling / piv;
        if piv == 0.0 {
            piv = f64::MIN_POSITIVE;
        }
        if piv < 0.0 {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_laplacian_stencil() {
        let n = 50;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            rhs[i] = 2.0 * x_true[i];
            if i > 0 {
                rhs[i] -= x_true[i - 1];
            }
            if i + 1 < n {
                rhs[i] -= x_true[i + 1];
            }
        }
        let x = solve_symmetric(&diag, &off, &rhs).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn sturm_count_matches_known_spectrum() {
        // eigenvalues of tridiag(-1, 2, -1) of size n: 2 - 2 cos(k pi / (n + 1))
        let n = 20;
        let off = vec![-1.0; n - 1];
        let lam = |k: usize| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
        for (shift, expect) in [(0.5 * (lam(1) + lam(2)), 1), (0.5 * (lam(5) + lam(6)), 5), (-0.1, 0)] {
            let diag: Vec<f64> = vec![2.0 - shift; n];
            assert_eq!(negative_pivots(&diag, &off), expect);
        }
    }
}
