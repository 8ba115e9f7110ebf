//! One species on its front-fixed grid `xi = x / s(t)`, `xi` in `[0, 1]`.
//!
//! In mapped coordinates the equation `w_t = d w_xx + R` becomes
//!
//! ```text
//! w_t = (d / s^2) w_xixi + xi (s'/s) w_xi + R
//! ```
//!
//! with `w_xi(0) = 0` and `w(1) = 0`. Diffusion is implicit, mesh advection and
//! reaction are explicit, and the front moves by the lagged Stefan flux.

use serde::{Deserialize, Serialize};

use super::tridiag;

/// Lower bound below which a negative value is treated as a scheme failure
/// rather than round-off.
pub const NEGATIVITY_LIMIT: f64 = 1e-8;
/// Slack allowed on a front update before it counts as moving backwards.
pub const FRONT_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontField {
    /// Front position.
    pub s: f64,
    /// Speed used in the last step.
    pub sdot: f64,
    /// Values on the uniform mapped grid; the last entry is the front and is zero.
    pub w: Vec<f64>,
}

impl FrontField {
    /// Initial field with the front speed given by the Stefan law.
    pub fn initial(s: f64, w: Vec<f64>, mu: f64) -> Self {
        let mut f = FrontField { s, sdot: 0.0, w };
        f.sdot = (-mu * f.front_gradient()).max(0.0);
        f
    }

    pub fn n_intervals(&self) -> usize {
        self.w.len() - 1
    }

    pub fn dxi(&self) -> f64 {
        1.0 / self.n_intervals() as f64
    }

    pub fn origin(&self) -> f64 {
        self.w[0]
    }

    pub fn max(&self) -> f64 {
        self.w.iter().copied().fold(0.0, f64::max)
    }

    /// Physical gradient at the front.
    pub fn front_gradient(&self) -> f64 {
        boundary_flux(&self.w, self.s, self.dxi())
    }

    /// Discrete `max|w| + max|w_x|` in physical units.
    pub fn c1_norm(&self) -> f64 {
        let scale = 1.0 / (self.dxi() * self.s);
        let grad = self
            .w
            .windows(2)
            .map(|p| ((p[1] - p[0]) * scale).abs())
            .fold(0.0, f64::max);
        self.max() + grad
    }

    /// Value at physical position `x`, zero beyond the front.
    pub fn at(&self, x: f64) -> f64 {
        cross_interpolate(&self.w, self.s, x)
    }
}

/// Second-order one-sided derivative at `xi = 1`, converted to physical units.
pub fn boundary_flux(profile: &[f64], s: f64, dxi: f64) -> f64 {
    let n = profile.len() - 1;
    (3.0 * profile[n] - 4.0 * profile[n - 1] + profile[n - 2]) / (2.0 * dxi) / s
}

/// Linear interpolation of a mapped profile at physical `x`, exactly zero at
/// and beyond the front.
pub fn cross_interpolate(profile: &[f64], s: f64, x: f64) -> f64 {
    if x >= s {
        return 0.0;
    }
    let n = profile.len() - 1;
    let pos = (x / s) * n as f64;
    let j = (pos.floor() as usize).min(n - 1);
    let frac = pos - j as f64;
    profile[j] + frac * (profile[j + 1] - profile[j])
}

/// What went wrong inside a single field update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldFault {
    NonFinite,
    Negative(f64),
    Backward { from: f64, to: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStep {
    /// Largest magnitude clipped to zero.
    pub clipped: f64,
    /// `s_new - s_old`.
    pub advance: f64,
}

/// Reusable buffers for the tridiagonal solve.
#[derive(Debug, Clone)]
pub struct FieldStepper {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl FieldStepper {
    pub fn new(n_intervals: usize) -> Self {
        let n = n_intervals;
        FieldStepper {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            rhs: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }

    /// Advances `field` by `dt`. `rates[j]` is the explicit reaction (plus any
    /// source) at node `j`, evaluated from the state at the start of the step.
    pub fn advance(
        &mut self,
        field: &mut FrontField,
        d: f64,
        mu: f64,
        dt: f64,
        rates: &[f64],
    ) -> Result<FieldStep, FieldFault> {
        let s_old = field.s;

        let candidate = s_old - dt * mu * field.front_gradient();
        if !candidate.is_finite() {
            return Err(FieldFault::NonFinite);
        }
        if candidate < s_old - FRONT_SLACK {
            return Err(FieldFault::Backward {
                from: s_old,
                to: candidate,
            });
        }
        let s_new = candidate.max(s_old);
        let sdot = (s_new - s_old) / dt;
        let clipped = self.advance_to(field, d, s_new, sdot, dt, rates)?;
        Ok(FieldStep {
            clipped,
            advance: s_new - s_old,
        })
    }

    /// Advances the profile with a prescribed new front position and returns
    /// the largest magnitude clipped to zero.
    pub fn advance_to(
        &mut self,
        field: &mut FrontField,
        d: f64,
        s_new: f64,
        sdot: f64,
        dt: f64,
        rates: &[f64],
    ) -> Result<f64, FieldFault> {
        let n = field.n_intervals();
        let dxi = field.dxi();
        let w = &field.w;
        let wind = sdot / field.s;
        let half = 0.5 / dxi;

        for j in 0..n {
            let xi = j as f64 * dxi;
            let adv = if j == 0 {
                0.0
            } else if j + 2 <= n {
                // second-order upwind: the wind xi s'/s >= 0 carries information from larger xi
                (-3.0 * w[j] + 4.0 * w[j + 1] - w[j + 2]) * half
            } else {
                (w[j + 1] - w[j - 1]) * half
            };
            self.rhs[j] = w[j] + dt * (xi * wind * adv + rates[j]);
        }

        let kappa = dt * d / (s_new * s_new * dxi * dxi);
        for j in 0..n {
            self.lower[j] = -kappa;
            self.diag[j] = 1.0 + 2.0 * kappa;
            self.upper[j] = -kappa;
        }
        // Mirror node at xi = 0 enforces w_xi(0) = 0.
        self.upper[0] = -2.0 * kappa;
        tridiag::solve_in_place(
            &self.lower,
            &self.diag,
            &self.upper,
            &mut self.rhs,
            &mut self.scratch,
        );

        let mut min = 0.0f64;
        let mut finite = s_new.is_finite();
        for j in 0..n {
            let v = self.rhs[j];
            finite &= v.is_finite();
            min = min.min(v);
        }
        if !finite {
            return Err(FieldFault::NonFinite);
        }
        if min < -NEGATIVITY_LIMIT {
            return Err(FieldFault::Negative(min));
        }
        field.w[..n].copy_from_slice(&self.rhs[..n]);
        for v in field.w[..n].iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        field.w[n] = 0.0;
        field.s = s_new;
        field.sdot = sdot;
        Ok(0.0 - min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mapped(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..=n).map(|j| f(j as f64 / n as f64)).collect()
    }

    #[test]
    fn flux_of_linear_profile() {
        let p = mapped(64, |xi| 1.0 - xi);
        assert!((boundary_flux(&p, 2.0, 1.0 / 64.0) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn flux_of_quadratic_profile_is_exact() {
        let p = mapped(64, |xi| 1.0 - xi * xi);
        assert!((boundary_flux(&p, 1.0, 1.0 / 64.0) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn flux_of_zero_profile() {
        assert_eq!(boundary_flux(&[0.0; 33], 3.0, 1.0 / 32.0), 0.0);
    }

    #[test]
    fn cross_interpolation_edges() {
        let p = mapped(32, |xi| 1.0 - xi);
        assert_eq!(cross_interpolate(&p, 2.0, 2.0), 0.0);
        assert_eq!(cross_interpolate(&p, 2.0, 4.0), 0.0);
        let ones = vec![1.0; 33];
        assert_eq!(cross_interpolate(&ones, 2.0, 0.77), 1.0);
        assert!((cross_interpolate(&p, 2.0, 0.5) - 0.75).abs() < 1e-15);
        assert_eq!(cross_interpolate(&p, 2.0, 0.0), 1.0);
    }

    #[test]
    fn zero_field_is_stationary() {
        let mut f = FrontField {
            s: 1.5,
            sdot: 0.0,
            w: vec![0.0; 65],
        };
        let mut st = FieldStepper::new(64);
        let step = st.advance(&mut f, 1.0, 1.0, 1e-3, &vec![0.0; 65]).unwrap();
        assert_eq!(step.advance, 0.0);
        assert_eq!(f.s, 1.5);
        assert!(f.w.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pure_diffusion_decays_cosine_mode() {
        // w = cos(pi xi / 2) is the slowest Neumann/Dirichlet mode; with a
        // frozen front (mu = 0) it decays like exp(-d (pi/2s)^2 t).
        let n = 256;
        let s = 2.0;
        let mut f = FrontField {
            s,
            sdot: 0.0,
            w: mapped(n, |xi| (std::f64::consts::FRAC_PI_2 * xi).cos()),
        };
        let mut st = FieldStepper::new(n);
        let dt = 1e-3;
        let zeros = vec![0.0; n + 1];
        for _ in 0..1000 {
            st.advance(&mut f, 1.0, 0.0, dt, &zeros).unwrap();
        }
        let rate = (std::f64::consts::PI / (2.0 * s)).powi(2);
        let expected = (-rate).exp();
        assert!((f.w[0] - expected).abs() < 1e-3, "{} vs {expected}", f.w[0]);
        assert_eq!(f.s, s);
    }

    #[test]
    fn backward_front_is_rejected() {
        // A profile rising towards the front has a positive gradient there.
        let n = 32;
        let mut w = mapped(n, |xi| xi * (1.0 - xi) * 4.0);
        w[n - 1] = -0.5;
        let mut f = FrontField {
            s: 1.0,
            sdot: 0.0,
            w,
        };
        let mut st = FieldStepper::new(n);
        let err = st
            .advance(&mut f, 1.0, 1.0, 1e-3, &vec![0.0; n + 1])
            .unwrap_err();
        assert!(matches!(err, FieldFault::Backward { .. }));
    }
}
