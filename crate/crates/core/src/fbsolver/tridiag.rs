/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
///
/// `lower[0]` and `upper[n-1]` are ignored. The solution overwrites `rhs`;
/// `scratch` must have the same length. No pivoting: callers supply
/// diagonally dominant systems.
pub fn solve_in_place(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n && scratch.len() >= n);
    if n == 0 {
        return;
    }
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // [2 -1 0; -1 2 -1; 0 -1 2] x = [1 0 1]  =>  x = [1 1 1]
        let lower = [0.0, -1.0, -1.0];
        let diag = [2.0, 2.0, 2.0];
        let upper = [-1.0, -1.0, 0.0];
        let mut rhs = [1.0, 0.0, 1.0];
        let mut scratch = [0.0; 3];
        solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch);
        for x in rhs {
            assert!((x - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_dense_product() {
        let n = 50;
        let lower: Vec<f64> = (0..n).map(|i| -0.3 - 0.01 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.2 + 0.005 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + 0.1 * (i as f64).sin()).collect();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
        let mut rhs: Vec<f64> = (0..n)
            .map(|i| {
                let mut v = diag[i] * x_true[i];
                if i > 0 {
                    v += lower[i] * x_true[i - 1];
                }
                if i + 1 < n {
                    v += upper[i] * x_true[i + 1];
                }
                v
            })
            .collect();
        let mut scratch = vec![0.0; n];
        solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch);
        for (a, b) in rhs.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
