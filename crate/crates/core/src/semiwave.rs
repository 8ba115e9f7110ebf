//! Semi-wave speeds.
//!
//! For `gamma = (mu, a, b, d)` the semi-wave problem asks for a speed `c` and an
//! increasing profile `q` on `[0, inf)` with
//!
//! ```text
//! d q'' - c q' + q (a - b q) = 0,   q(0) = 0,  q'(0) = c / mu,  q(inf) = a / b,
//! ```
//!
//! and `0 < c < 2 sqrt(a d)`. The speed is found by shooting: integrate the
//! initial value problem started from `(0, c/mu)` and watch whether it overshoots
//! `a/b` or turns back (q' hits zero) below it. The two outcomes occur on
//! opposite ends of the admissible speed interval, and `c` is the switching
//! point located by bisection.
//!
//! The profile is then recovered by integrating backwards from the stable
//! manifold of the equilibrium `a/b`, which is well conditioned in that
//! direction, until `q` reaches zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{integrate_adaptive, rk4_step, AdaptiveOptions, Planar, Stop};
use crate::Params;

/// Relative closeness to `a/b` (and absolute bound on `q'`) that counts as
/// settled at the far end of the profile.
pub const SETTLE_TOL: f64 = 1e-6;
const MAX_BISECTIONS: usize = 200;
/// Probes sit this close (relative) to the ends of `(0, 2 sqrt(a d))`.
const PROBE_OFFSET: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemiwaveError {
    #[error("semi-wave parameter `{0}` must be finite and positive")]
    InvalidParams(&'static str),
    #[error("tolerance {0} outside (0, 1e-3]")]
    InvalidTolerance(f64),
    #[error("shooting probes gave {lo:?} at c->0 and {hi:?} at c->2sqrt(ad); no bracket")]
    NoBracket { lo: Shot, hi: Shot },
    #[error("bisection did not reach the tolerance after {0} iterations")]
    Nonconvergence(usize),
    #[error("initial value integration failed at c = {0}")]
    IntegratorFailure(f64),
    #[error("profile did not settle within y_max = {y_max} (needs {needed})")]
    ProfileNotSettled { y_max: f64, needed: f64 },
    #[error("semi-wave post-condition violated: {0}")]
    InvariantViolation(String),
}

/// `gamma = (mu, a, b, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiWaveParams {
    mu: f64,
    a: f64,
    b: f64,
    d: f64,
}

impl SemiWaveParams {
    pub fn new(mu: f64, a: f64, b: f64, d: f64) -> Result<Self, SemiwaveError> {
        for (name, v) in [("mu", mu), ("a", a), ("b", b), ("d", d)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SemiwaveError::InvalidParams(name));
            }
        }
        Ok(SemiWaveParams { mu, a, b, d })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Carrying level `a/b`.
    pub fn level(&self) -> f64 {
        self.a / self.b
    }

    /// Upper end of the admissible speed interval, `2 sqrt(a d)`.
    pub fn c_max(&self) -> f64 {
        2.0 * (self.a * self.d).sqrt()
    }

    /// Natural length scale `sqrt(d/a)`.
    pub fn length_scale(&self) -> f64 {
        (self.d / self.a).sqrt()
    }

    pub fn default_y_max(&self) -> f64 {
        50.0 * self.length_scale().max(1.0)
    }
}

/// Result of one shot from `(q, q') = (0, c/mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shot {
    /// `q` exceeded `a/b`.
    Overshoot,
    /// `q'` dropped to zero while `q < a/b`.
    Collapse,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemiWave {
    pub params: SemiWaveParams,
    pub c: f64,
    pub y_grid: Vec<f64>,
    pub q: Vec<f64>,
    /// Max over interior nodes of `|d q'' - c q' + q(a - bq)|` with centred differences.
    pub residual: f64,
    /// Final bisection bracket `[lo, hi]` on `c`.
    pub bracket: (f64, f64),
    pub bisections: usize,
}

impl SemiWave {
    pub fn y_max(&self) -> f64 {
        *self.y_grid.last().unwrap_or(&0.0)
    }

    pub fn spacing(&self) -> f64 {
        self.y_grid[1] - self.y_grid[0]
    }

    /// Allowed mismatch between the first divided difference and `c/mu`: a
    /// relative floor, the first-order stencil error and the bracket width
    /// propagated through `c/mu`.
    pub fn derivative_tolerance(&self) -> f64 {
        let p = &self.params;
        let slope = self.c / p.mu;
        let width = self.bracket.1 - self.bracket.0;
        1e-3 * slope + self.spacing() * self.c * slope / p.d + 4.0 * width / p.mu
    }

    /// Checks the post-conditions of [`solve_semiwave`].
    pub fn check_invariants(&self) -> Result<(), String> {
        let p = &self.params;
        if !(self.c > 0.0 && self.c < p.c_max()) {
            return Err(format!("c = {} outside (0, {})", self.c, p.c_max()));
        }
        if self.q.len() < 3 || self.q.len() != self.y_grid.len() {
            return Err("profile too short".into());
        }
        if self.q[0] != 0.0 {
            return Err(format!("q(0) = {}", self.q[0]));
        }
        if let Some(i) = self.q.windows(2).position(|w| w[1] <= w[0]) {
            return Err(format!("q not strictly increasing at node {i}"));
        }
        let last = *self.q.last().unwrap();
        if (last - p.level()).abs() >= SETTLE_TOL * p.level() {
            return Err(format!(
                "q(y_max) = {last} not within tolerance of {}",
                p.level()
            ));
        }
        let dd = (self.q[1] - self.q[0]) / self.spacing();
        let target = self.c / p.mu;
        if (dd - target).abs() > self.derivative_tolerance() {
            return Err(format!("q'(0) ~ {dd} but c/mu = {target}"));
        }
        Ok(())
    }
}

/// Defect `max |d q'' - c q' + q(a - bq)|` over interior nodes of a uniform grid.
pub fn profile_defect(p: &SemiWaveParams, c: f64, h: f64, q: &[f64]) -> f64 {
    q.windows(3)
        .map(|w| {
            let q2 = (w[2] - 2.0 * w[1] + w[0]) / (h * h);
            let q1 = (w[2] - w[0]) / (2.0 * h);
            (p.d * q2 - c * q1 + w[1] * (p.a - p.b * w[1])).abs()
        })
        .fold(0.0, f64::max)
}

fn rhs(p: &SemiWaveParams, c: f64) -> impl Fn(&Planar) -> Planar + '_ {
    move |y: &Planar| [y[1], (c * y[1] - y[0] * (p.a - p.b * y[0])) / p.d]
}

/// Shoot once with speed `c`.
pub fn shoot(p: &SemiWaveParams, c: f64, tol: f64, y_max: f64) -> Result<Shot, SemiwaveError> {
    let level = p.level();
    let opts = AdaptiveOptions {
        atol: tol / 100.0,
        rtol: tol / 100.0,
        h_init: 1e-3 * p.length_scale(),
        h_max: 0.25 * p.length_scale(),
        max_steps: 2_000_000,
    };
    let res = integrate_adaptive(rhs(p, c), 0.0, [0.0, c / p.mu], y_max, &opts, |_, y| {
        if y[0] > level {
            Some(Shot::Overshoot)
        } else if y[1] <= 0.0 {
            Some(Shot::Collapse)
        } else {
            None
        }
    });
    match res.stop {
        Stop::Event(s) => Ok(s),
        Stop::End => {
            // Still near the saddle at a/b: the sign of the unstable component decides.
            let (lam_minus, _) = saddle_rates(p, c);
            let dev = res.y[0] - level;
            let unstable = res.y[1] - lam_minus * dev;
            Ok(if unstable > 0.0 {
                Shot::Overshoot
            } else {
                Shot::Collapse
            })
        }
        Stop::StepUnderflow => Err(SemiwaveError::IntegratorFailure(c)),
    }
}

/// Eigenvalues `(lambda_-, lambda_+)` of the linearisation at `q = a/b`.
fn saddle_rates(p: &SemiWaveParams, c: f64) -> (f64, f64) {
    let disc = (c * c + 4.0 * p.a * p.d).sqrt();
    ((c - disc) / (2.0 * p.d), (c + disc) / (2.0 * p.d))
}

/// Speed only, by bisection on the shooting outcome. Returns `(c, bracket, iterations)`.
pub fn semiwave_speed(
    p: &SemiWaveParams,
    tol: f64,
    y_max: f64,
) -> Result<(f64, (f64, f64), usize), SemiwaveError> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(SemiwaveError::InvalidTolerance(tol));
    }
    let mut lo = p.c_max() * PROBE_OFFSET;
    let mut hi = p.c_max() * (1.0 - PROBE_OFFSET);
    let shot_lo = shoot(p, lo, tol, y_max)?;
    let shot_hi = shoot(p, hi, tol, y_max)?;
    if shot_lo == shot_hi {
        return Err(SemiwaveError::NoBracket {
            lo: shot_lo,
            hi: shot_hi,
        });
    }
    let mut iters = 0;
    while hi - lo > 0.25 * tol {
        if iters >= MAX_BISECTIONS {
            return Err(SemiwaveError::Nonconvergence(iters));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if shoot(p, mid, tol, y_max)? == shot_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    Ok((0.5 * (lo + hi), (lo, hi), iters))
}

/// Solve the semi-wave problem to speed accuracy `tol`.
///
/// `y_max` bounds both the shooting interval and the length of the returned
/// profile; [`SemiWaveParams::default_y_max`] is a safe choice.
pub fn solve_semiwave(p: &SemiWaveParams, tol: f64, y_max: f64) -> Result<SemiWave, SemiwaveError> {
    let (c, bracket, bisections) = semiwave_speed(p, tol, y_max)?;
    let h = p.length_scale() * (3.0 * tol.sqrt()).clamp(1e-4, 5e-3);
    let (y_grid, q) = settled_profile(p, c, h, y_max)?;
    let residual = profile_defect(p, c, y_grid[1] - y_grid[0], &q);
    let wave = SemiWave {
        params: *p,
        c,
        y_grid,
        q,
        residual,
        bracket,
        bisections,
    };
    wave.check_invariants()
        .map_err(SemiwaveError::InvariantViolation)?;
    Ok(wave)
}

/// Integrates backwards with fixed-step RK4 from a point on the stable
/// manifold of `a/b` until `q` reaches zero, then re-runs with a step that
/// lands on `q = 0` and returns the profile in increasing `y`.
fn settled_profile(
    p: &SemiWaveParams,
    c: f64,
    h: f64,
    y_max: f64,
) -> Result<(Vec<f64>, Vec<f64>), SemiwaveError> {
    let level = p.level();
    let (lam_minus, _) = saddle_rates(p, c);
    let eps0 = 0.5 * (SETTLE_TOL * level).min(SETTLE_TOL / lam_minus.abs());
    let start: Planar = [level - eps0, -lam_minus * eps0];
    let f = rhs(p, c);

    // First pass: locate the length to q = 0.
    let mut z = start;
    let mut len = 0.0;
    loop {
        let next = rk4_step(&f, &z, -h);
        if next[1] <= 0.0 || !next[0].is_finite() {
            return Err(SemiwaveError::InvariantViolation(format!(
                "backward profile lost monotonicity at q = {}",
                next[0]
            )));
        }
        if next[0] <= 0.0 {
            len += h * z[0] / (z[0] - next[0]);
            break;
        }
        z = next;
        len += h;
        if len > y_max {
            return Err(SemiwaveError::ProfileNotSettled { y_max, needed: len });
        }
    }

    // Second pass: n uniform steps of length len/n, Newton-corrected on len.
    let n = (len / h).ceil().max(2.0) as usize;
    let mut traj = Vec::with_capacity(n + 1);
    for _ in 0..8 {
        traj.clear();
        let step = len / n as f64;
        let mut z = start;
        traj.push(z);
        for _ in 0..n {
            z = rk4_step(&f, &z, -step);
            traj.push(z);
        }
        let end = traj[n];
        if end[0].abs() <= 1e-15 * level {
            break;
        }
        len += end[0] / end[1];
    }
    if len > y_max {
        return Err(SemiwaveError::ProfileNotSettled { y_max, needed: len });
    }
    let step = len / n as f64;
    // Roundoff keeps the endpoint a few ulps away from zero; absorb it with a
    // linear correction, which leaves second differences untouched.
    let miss = traj[n][0];
    let mut q: Vec<f64> = traj
        .iter()
        .rev()
        .enumerate()
        .map(|(i, z)| z[0] - miss * (1.0 - i as f64 / n as f64))
        .collect();
    q[0] = 0.0;
    let y_grid = (0..=n).map(|i| i as f64 * step).collect();
    Ok((y_grid, q))
}

/// Speeds entering the long-time results, `None` where undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedSummary {
    /// `c(mu1, r1(1-k), r1, d1)`, defined for `k < 1`.
    pub c1_reduced: Option<f64>,
    /// `c(mu2, r2(1-h), r2, d2)`, defined for `h < 1`.
    pub c2_reduced: Option<f64>,
    /// `c(mu2, r2, r2, d2)`.
    pub c2_free: f64,
}

pub const DEFAULT_TOL: f64 = 1e-8;

/// `c1(mu, a) = c(mu, a, r1, d1)`.
pub fn c1(params: &Params, mu: f64, a: f64, tol: f64) -> Result<f64, SemiwaveError> {
    let p = SemiWaveParams::new(mu, a, params.r1, params.d1)?;
    Ok(solve_semiwave(&p, tol, p.default_y_max())?.c)
}

/// `c2(mu, a) = c(mu, a, r2, d2)`.
pub fn c2(params: &Params, mu: f64, a: f64, tol: f64) -> Result<f64, SemiwaveError> {
    let p = SemiWaveParams::new(mu, a, params.r2, params.d2)?;
    Ok(solve_semiwave(&p, tol, p.default_y_max())?.c)
}

pub fn competition_speeds(params: &Params) -> Result<SpeedSummary, SemiwaveError> {
    competition_speeds_tol(params, DEFAULT_TOL)
}

pub fn competition_speeds_tol(params: &Params, tol: f64) -> Result<SpeedSummary, SemiwaveError> {
    let c1_reduced = if params.k < 1.0 {
        Some(c1(params, params.mu1, params.r1 * (1.0 - params.k), tol)?)
    } else {
        None
    };
    let c2_reduced = if params.h < 1.0 {
        Some(c2(params, params.mu2, params.r2 * (1.0 - params.h), tol)?)
    } else {
        None
    };
    let c2_free = c2(params, params.mu2, params.r2, tol)?;
    Ok(SpeedSummary {
        c1_reduced,
        c2_reduced,
        c2_free,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error("region A is only defined for k < 1 (got k = {0})")]
    UndefinedRegion(f64),
    #[error(transparent)]
    Semiwave(#[from] SemiwaveError),
}

/// Membership test for `c1(mu1, r1(1-k)) > c2(mu2, r2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionA {
    pub inside: bool,
    pub c1_reduced: f64,
    pub c2_free: f64,
    pub gap: f64,
    pub tol: f64,
    /// The gap could not be resolved at the finest tolerance; `inside` is false.
    pub gap_below_resolution: bool,
}

pub fn in_region_a(params: &Params) -> Result<RegionA, RegionError> {
    if params.k >= 1.0 {
        return Err(RegionError::UndefinedRegion(params.k));
    }
    let mut tol = 1e-6;
    loop {
        let c1r = c1(params, params.mu1, params.r1 * (1.0 - params.k), tol)?;
        let c2f = c2(params, params.mu2, params.r2, tol)?;
        let gap = c1r - c2f;
        if gap.abs() >= 10.0 * tol {
            return Ok(RegionA {
                inside: gap > 0.0,
                c1_reduced: c1r,
                c2_free: c2f,
                gap,
                tol,
                gap_below_resolution: false,
            });
        }
        if tol <= 1e-11 {
            return Ok(RegionA {
                inside: false,
                c1_reduced: c1r,
                c2_free: c2f,
                gap,
                tol,
                gap_below_resolution: true,
            });
        }
        tol *= 0.01;
    }
}
