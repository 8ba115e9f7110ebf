//! Independent semi-wave oracle: Newton's method on the finite-difference
//! boundary value problem with the speed as an extra unknown.
//!
//! Unknowns are q_1..q_{N-1} and c on a uniform grid over [0, Y], with
//! q_0 = 0 and q_N = a/b imposed, the interior equations discretised by
//! centred differences and q'(0) = c/mu by the second-order one-sided stencil.
//! Two grid levels are Richardson-extrapolated.

#![allow(dead_code)]

pub struct OracleParams {
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut beta = diag[0];
    x[0] = rhs[0] / beta;
    for i in 1..n {
        c[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i];
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i + 1] * x[i + 1];
    }
    x
}

fn residuals(p: &OracleParams, q: &[f64], c: f64, h: f64) -> (Vec<f64>, f64) {
    let n = q.len() - 1;
    let f = (1..n)
        .map(|i| {
            p.d * (q[i + 1] - 2.0 * q[i] + q[i - 1]) / (h * h)
                - c * (q[i + 1] - q[i - 1]) / (2.0 * h)
                + q[i] * (p.a - p.b * q[i])
        })
        .collect();
    let g = (-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * h) - c / p.mu;
    (f, g)
}

fn norm(f: &[f64], g: f64) -> f64 {
    f.iter().fold(g.abs(), |m, v| m.max(v.abs()))
}

/// Newton solve on n intervals over [0, y_end]; returns c.
pub fn newton_speed(p: &OracleParams, n: usize, y_end: f64) -> f64 {
    let h = y_end / n as f64;
    let ell = (p.d / p.a).sqrt();
    let level = p.a / p.b;
    let mut q: Vec<f64> = (0..=n)
        .map(|i| level * (i as f64 * h / (2.0 * ell)).tanh())
        .collect();
    q[n] = level;
    let mut c = (p.a * p.d).sqrt();
    for _ in 0..100 {
        let (f, g) = residuals(p, &q, c, h);
        let res = norm(&f, g);
        let m = n - 1;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut dc_col = vec![0.0; m];
        for k in 0..m {
            let i = k + 1;
            lower[k] = p.d / (h * h) + c / (2.0 * h);
            diag[k] = -2.0 * p.d / (h * h) + p.a - 2.0 * p.b * q[i];
            upper[k] = p.d / (h * h) - c / (2.0 * h);
            dc_col[k] = -(q[i + 1] - q[i - 1]) / (2.0 * h);
        }
        let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let x1 = thomas(&lower, &diag, &upper, &neg_f);
        let x2 = thomas(&lower, &diag, &upper, &dc_col);
        // Boundary row: (4 dq_1 - dq_2)/(2h) - dc/mu = -g
        let r1 = 4.0 / (2.0 * h);
        let r2 = -1.0 / (2.0 * h);
        let s = -1.0 / p.mu;
        let rx1 = r1 * x1[0] + r2 * x1[1];
        let rx2 = r1 * x2[0] + r2 * x2[1];
        let dc = (-g - rx1) / (s - rx2);
        let full_step = (0..m).fold(dc.abs(), |mx, k| mx.max((x1[k] - dc * x2[k]).abs()));
        if full_step < 1e-11 {
            return c + dc;
        }

        // Damped update: halve until the residual decreases.
        let mut lambda = 1.0;
        loop {
            let mut q_try = q.clone();
            for k in 0..m {
                q_try[k + 1] += lambda * (x1[k] - dc * x2[k]);
            }
            let c_try = c + lambda * dc;
            let (ft, gt) = residuals(p, &q_try, c_try, h);
            if norm(&ft, gt) < res || lambda < 1e-4 {
                q = q_try;
                c = c_try;
                break;
            }
            lambda *= 0.5;
        }
    }
    panic!("oracle Newton did not converge");
}

/// Richardson-extrapolated oracle speed.
pub fn oracle_speed(p: &OracleParams) -> f64 {
    let ell = (p.d / p.a).sqrt();
    let y_end = 40.0 * ell;
    let n = 4000;
    let coarse = newton_speed(p, n, y_end);
    let fine = newton_speed(p, 2 * n, y_end);
    (4.0 * fine - coarse) / 3.0
}
