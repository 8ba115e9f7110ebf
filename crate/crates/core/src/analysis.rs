//! Closed-form thresholds, certificates and trajectory classification.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fbsolver::{InitialData, Trajectory};
use crate::semiwave::{self, SemiwaveError};
use crate::Params;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("degenerate competition: h*k = 1 (k = {k}, h = {h})")]
    DegenerateCompetition { k: f64, h: f64 },
    #[error("insufficient data: {have} points in the fit window, need {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("window fraction {0} must lie in (0, 1)")]
    InvalidWindow(f64),
    #[error("no real eigen-length: 4 d2 (r2 + lambda) - sigma^2 = {0} <= 0")]
    ImaginaryRoot(f64),
    #[error("infeasible barrier: h (1 - k) = {0} >= 1")]
    InfeasibleBarrier(f64),
    #[error("front gap too small: s2_0 = {s2_0} <= s1_0 = {s1_0}")]
    GapTooSmall { s1_0: f64, s2_0: f64 },
    #[error("species {0} not present in trajectory")]
    NoSuchSpecies(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Semiwave(#[from] SemiwaveError),
}

/// `(pi/2) sqrt(d / r)`: the critical habitat half-length for logistic growth rate `r`.
pub fn critical_length(d: f64, r: f64) -> f64 {
    FRAC_PI_2 * (d / r).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub s1_star: f64,
    pub s2_star: f64,
    /// Defined for `k < 1`.
    pub s1_tilde: Option<f64>,
    /// Defined for `h < 1`.
    pub s2_tilde: Option<f64>,
}

impl Thresholds {
    pub fn stars(&self) -> [f64; 2] {
        [self.s1_star, self.s2_star]
    }
}

pub fn thresholds(params: &Params) -> Thresholds {
    let p = params;
    Thresholds {
        s1_star: critical_length(p.d1, p.r1),
        s2_star: critical_length(p.d2, p.r2),
        s1_tilde: (p.k < 1.0).then(|| critical_length(p.d1, p.r1 * (1.0 - p.k))),
        s2_tilde: (p.h < 1.0).then(|| critical_length(p.d2, p.r2 * (1.0 - p.h))),
    }
}

/// Long-time values `((1-k)/(1-hk), (1-h)/(1-hk))` under coexistence.
pub fn coexistence_limits(k: f64, h: f64) -> Result<(f64, f64), AnalysisError> {
    let den = 1.0 - h * k;
    if den == 0.0 {
        return Err(AnalysisError::DegenerateCompetition { k, h });
    }
    Ok(((1.0 - k) / den, (1.0 - h) / den))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationBounds {
    /// `u[n-1]` is the lower bound for `u` after `n` rounds.
    pub u: Vec<f64>,
    /// `v[n-1]` is the upper bound for `v` after `n` rounds.
    pub v: Vec<f64>,
    pub u_limit: f64,
    pub v_limit: f64,
    pub converged: bool,
}

pub const ITERATION_TOL: f64 = 1e-10;

/// `u_1 = 1-k, v_1 = 1, v_n = 1 - h u_{n-1}, u_n = 1 - k v_n`.
pub fn iteration_bounds(k: f64, h: f64, n: usize) -> Result<IterationBounds, AnalysisError> {
    if !(0.0..1.0).contains(&k) || !(0.0..1.0).contains(&h) {
        return Err(AnalysisError::InvalidInput(format!(
            "need 0 <= k, h < 1 (k = {k}, h = {h})"
        )));
    }
    if n == 0 {
        return Err(AnalysisError::InvalidInput(
            "need at least one iteration".into(),
        ));
    }
    let (u_limit, v_limit) = coexistence_limits(k, h)?;
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    u.push(1.0 - k);
    v.push(1.0);
    for i in 1..n {
        let vn = 1.0 - h * u[i - 1];
        v.push(vn);
        u.push(1.0 - k * vn);
    }
    let converged = (u[n - 1] - u_limit).abs() < ITERATION_TOL;
    Ok(IterationBounds {
        u,
        v,
        u_limit,
        v_limit,
        converged,
    })
}

/// Least-squares line through the trailing part of a front history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedFit {
    pub slope: f64,
    pub drift: f64,
    pub rms_residual: f64,
    pub points: usize,
    pub t_start: f64,
}

pub fn fit_line(t: &[f64], s: &[f64]) -> Result<SpeedFit, AnalysisError> {
    let n = t.len();
    if n < 3 {
        return Err(AnalysisError::InsufficientData { have: n, need: 3 });
    }
    let tm = t.iter().sum::<f64>() / n as f64;
    let sm = s.iter().sum::<f64>() / n as f64;
    let (mut stt, mut sts) = (0.0, 0.0);
    for (&ti, &si) in t.iter().zip(s) {
        stt += (ti - tm) * (ti - tm);
        sts += (ti - tm) * (si - sm);
    }
    if stt <= 0.0 {
        return Err(AnalysisError::InsufficientData { have: 1, need: 3 });
    }
    let slope = sts / stt;
    let drift = sm - slope * tm;
    let ss: f64 = t
        .iter()
        .zip(s)
        .map(|(&ti, &si)| (si - drift - slope * ti).powi(2))
        .sum();
    Ok(SpeedFit {
        slope,
        drift,
        rms_residual: (ss / n as f64).sqrt(),
        points: n,
        t_start: t[0],
    })
}

/// Fits `s(t) = slope t + drift` over the trailing `window_fraction` of samples.
/// `species` is 1-based.
pub fn fit_front_speed(
    traj: &Trajectory,
    species: usize,
    window_fraction: f64,
) -> Result<SpeedFit, AnalysisError> {
    if !(window_fraction > 0.0 && window_fraction < 1.0) {
        return Err(AnalysisError::InvalidWindow(window_fraction));
    }
    if species == 0 || species > traj.species {
        return Err(AnalysisError::NoSuchSpecies(species));
    }
    let n = traj.samples.len();
    let m = ((n as f64) * window_fraction).ceil() as usize;
    if m < 3 {
        return Err(AnalysisError::InsufficientData { have: m, need: 3 });
    }
    let tail = &traj.samples[n - m..];
    let t: Vec<f64> = tail.iter().map(|s| s.t).collect();
    let s: Vec<f64> = tail.iter().map(|s| s.s[species - 1]).collect();
    fit_line(&t, &s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Spreading,
    Vanishing,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyCriteria {
    pub vanish_tol: f64,
    pub slope_floor: f64,
    pub window: f64,
}

impl Default for ClassifyCriteria {
    fn default() -> Self {
        ClassifyCriteria {
            vanish_tol: 1e-4,
            slope_floor: 1e-3,
            window: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesOutcome {
    pub label: Label,
    pub final_front: f64,
    pub final_max: f64,
    /// `None` when the window held too few samples to fit.
    pub slope: Option<f64>,
    pub drift: Option<f64>,
    pub threshold: f64,
    pub window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub t_end: f64,
    pub species: Vec<SpeciesOutcome>,
}

impl Outcome {
    pub fn label(&self, species: usize) -> Label {
        self.species[species - 1].label
    }

    pub fn any_indeterminate(&self) -> bool {
        self.species.iter().any(|s| s.label == Label::Indeterminate)
    }
}

/// Labels each species against its own threshold in `stars`.
pub fn classify_with(traj: &Trajectory, stars: &[f64], criteria: &ClassifyCriteria) -> Outcome {
    let last = traj.last();
    let species = (0..traj.species)
        .map(|i| {
            let fit = fit_front_speed(traj, i + 1, criteria.window).ok();
            let slope = fit.map(|f| f.slope);
            let final_front = last.s[i];
            let final_max = last.max[i];
            let label = if final_max < criteria.vanish_tol {
                Label::Vanishing
            } else if final_front > stars[i] && slope.is_some_and(|s| s > criteria.slope_floor) {
                Label::Spreading
            } else {
                Label::Indeterminate
            };
            SpeciesOutcome {
                label,
                final_front,
                final_max,
                slope,
                drift: fit.map(|f| f.drift),
                threshold: stars[i],
                window: criteria.window,
            }
        })
        .collect();
    Outcome {
        t_end: last.t,
        species,
    }
}

pub fn classify(
    traj: &Trajectory,
    thresholds: &Thresholds,
    criteria: &ClassifyCriteria,
) -> Outcome {
    classify_with(traj, &thresholds.stars(), criteria)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl Check {
    fn new(name: &str, status: CheckStatus, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status,
            detail: detail.into(),
        }
    }
}

// Observed conclusion "must spread": Spreading passes, Vanishing fails and an
// undecided label is reported as not applicable.
fn must_spread(name: &str, label: Label, what: &str) -> Check {
    match label {
        Label::Spreading => Check::new(name, CheckStatus::Pass, format!("{what} spreads")),
        Label::Vanishing => Check::new(name, CheckStatus::Fail, format!("{what} vanished")),
        Label::Indeterminate => Check::new(
            name,
            CheckStatus::NotApplicable,
            format!("{what} undecided"),
        ),
    }
}

/// Evaluates the spreading-vanishing implications whose hypotheses are observed
/// in a two-species run.
pub fn dichotomy_consistency(
    outcome: &Outcome,
    thresholds: &Thresholds,
    traj: &Trajectory,
) -> Vec<Check> {
    let mut out = Vec::new();
    if outcome.species.len() != 2 || traj.species != 2 {
        out.push(Check::new(
            "two-species",
            CheckStatus::NotApplicable,
            "single-species run",
        ));
        return out;
    }
    let lab = [outcome.label(1), outcome.label(2)];
    let front = [traj.last().s[0], traj.last().s[1]];
    let start = [traj.first().s[0], traj.first().s[1]];
    let stars = thresholds.stars();
    let tildes = [thresholds.s1_tilde, thresholds.s2_tilde];

    // A species stopping beyond its critical length leaves room for the other.
    for i in 0..2 {
        let j = 1 - i;
        let name = format!("stalled-above-critical-{}", i + 1);
        if lab[i] == Label::Vanishing && front[i] > stars[i] {
            out.push(must_spread(&name, lab[j], &format!("species {}", j + 1)));
        } else {
            out.push(Check::new(
                &name,
                CheckStatus::NotApplicable,
                "hypothesis not observed",
            ));
        }
    }

    // Past the reduced threshold a species cannot be stopped.
    for i in 0..2 {
        let name = format!("beyond-reduced-threshold-{}", i + 1);
        match tildes[i] {
            Some(t) if front[i] > t => {
                out.push(must_spread(&name, lab[i], &format!("species {}", i + 1)))
            }
            _ => out.push(Check::new(
                &name,
                CheckStatus::NotApplicable,
                "hypothesis not observed",
            )),
        }
    }

    let name = "one-large-start";
    if start[0] >= stars[0] || start[1] >= stars[1] {
        let c = if lab.contains(&Label::Spreading) {
            Check::new(name, CheckStatus::Pass, "at least one species spreads")
        } else if lab == [Label::Vanishing; 2] {
            Check::new(name, CheckStatus::Fail, "both species vanished")
        } else {
            Check::new(name, CheckStatus::NotApplicable, "undecided")
        };
        out.push(c);
    } else {
        out.push(Check::new(
            name,
            CheckStatus::NotApplicable,
            "hypothesis not observed",
        ));
    }

    let name = "both-large-start";
    match tildes {
        [Some(t1), Some(t2)] if start[0] >= t1 && start[1] >= t2 => {
            let c = if lab == [Label::Spreading; 2] {
                Check::new(name, CheckStatus::Pass, "both species spread")
            } else if lab.contains(&Label::Vanishing) {
                Check::new(name, CheckStatus::Fail, "a species vanished")
            } else {
                Check::new(name, CheckStatus::NotApplicable, "undecided")
            };
            out.push(c);
        }
        _ => out.push(Check::new(
            name,
            CheckStatus::NotApplicable,
            "hypothesis not observed",
        )),
    }
    out
}

/// `ell` with `pi / ell = sqrt(4 d2 (r2 + lambda) - sigma^2) / (2 d2)`.
pub fn eigen_length(d2: f64, r2: f64, sigma: f64, lambda: f64) -> Result<f64, AnalysisError> {
    let disc = 4.0 * d2 * (r2 + lambda) - sigma * sigma;
    if !(disc > 0.0) {
        return Err(AnalysisError::ImaginaryRoot(disc));
    }
    Ok(2.0 * PI * d2 / disc.sqrt())
}

/// Positive root of `delta (c + d2 delta) = (r2/2)(1 - h(1-k))`.
pub fn thm7_delta_max(
    c_sigma: f64,
    d2: f64,
    r2: f64,
    k: f64,
    h: f64,
) -> Result<f64, AnalysisError> {
    let load = h * (1.0 - k);
    if load >= 1.0 {
        return Err(AnalysisError::InfeasibleBarrier(load));
    }
    if !(d2 > 0.0 && r2 > 0.0 && c_sigma >= 0.0) {
        return Err(AnalysisError::InvalidInput(
            "need d2, r2 > 0 and c_sigma >= 0".into(),
        ));
    }
    let rhs = 0.5 * r2 * (1.0 - load);
    // Stable form of (-c + sqrt(c^2 + 4 d2 rhs)) / (2 d2).
    Ok(2.0 * rhs / (c_sigma + (c_sigma * c_sigma + 4.0 * d2 * rhs).sqrt()))
}

/// `2 max{ max(1, |u0|) sqrt(r1/(2 d1)), -min u0' }` from the samples.
pub fn front_speed_bound(params: &Params, init: &InitialData) -> f64 {
    let a = init.u0.sup_norm().max(1.0) * (params.r1 / (2.0 * params.d1)).sqrt();
    let b = -init
        .u0
        .derivative()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    2.0 * a.max(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm6Certificate {
    #[serde(rename = "k_bound")]
    pub k: f64,
    pub sigma_bar: f64,
    pub mu1_bar: f64,
    #[serde(rename = "L_of_mu1")]
    pub l_of_mu1: Option<f64>,
    pub ell_sigma: Option<f64>,
    pub delta_sigma: Option<f64>,
    /// No sigma satisfies the barrier condition; `sigma_bar` is 0.
    pub no_sigma: bool,
    pub holds: bool,
}

// Nodes used for the interior minimum over (0, ell).
const DELTA_NODES: usize = 2000;

/// `ell_sigma = 2 pi d2 / sqrt(2 d2 r2 - sigma^2)`.
fn ell_sigma(d2: f64, r2: f64, sigma: f64) -> Option<f64> {
    eigen_length(d2, r2, sigma, -0.5 * r2).ok()
}

/// Largest `delta` with `delta phi <= w0` and `delta phi <= 1/2` on `(0, ell)`,
/// where `phi = exp(-sigma y/(2 d2)) sin(pi y/ell)` and `w0(y) = v0(y + s1_0)`.
fn delta_sigma(params: &Params, init: &InitialData, sigma: f64, ell: f64) -> f64 {
    let d2 = params.d2;
    let mut best = f64::INFINITY;
    for j in 1..DELTA_NODES {
        let y = ell * j as f64 / DELTA_NODES as f64;
        let phi = (-sigma * y / (2.0 * d2)).exp() * (PI * y / ell).sin();
        let w = init.v0.eval(y + init.s1_0);
        best = best.min((w / phi).min(0.5 / phi));
    }
    best
}

/// Slack in the barrier condition `sigma < mu2 delta (pi/ell) exp(-sigma ell/(2 d2))`.
fn barrier_margin(params: &Params, init: &InitialData, sigma: f64) -> f64 {
    match ell_sigma(params.d2, params.r2, sigma) {
        Some(ell) => {
            let delta = delta_sigma(params, init, sigma, ell);
            params.mu2 * delta * PI / ell * (-sigma * ell / (2.0 * params.d2)).exp() - sigma
        }
        None => -sigma,
    }
}

/// Certificate that a slow first front cannot catch the second.
pub fn thm6_certificate(
    params: &Params,
    init: &InitialData,
) -> Result<Thm6Certificate, AnalysisError> {
    if init.s2_0 <= init.s1_0 {
        return Err(AnalysisError::GapTooSmall {
            s1_0: init.s1_0,
            s2_0: init.s2_0,
        });
    }
    let k = front_speed_bound(params, init);
    let sigma_max = (2.0 * params.d2 * params.r2).sqrt();

    // First failure on a scan, refined by bisection.
    let lo0 = sigma_max * 1e-9;
    let (sigma_bar, no_sigma) = if barrier_margin(params, init, lo0) <= 0.0 {
        (0.0, true)
    } else {
        const SCAN: usize = 400;
        let mut lo = lo0;
        let mut hi = None;
        for i in 1..SCAN {
            let s = sigma_max * i as f64 / SCAN as f64;
            if barrier_margin(params, init, s) <= 0.0 {
                hi = Some(s);
                break;
            }
            lo = s;
        }
        match hi {
            None => (sigma_max, false),
            Some(mut hi) => {
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if barrier_margin(params, init, mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (lo, false)
            }
        }
    };

    let sigma = k * params.mu1;
    let ell = ell_sigma(params.d2, params.r2, sigma);
    let delta = ell.map(|l| delta_sigma(params, init, sigma, l));
    let mu1_bar = sigma_bar / k;
    let gap = init.s2_0 - init.s1_0;
    let holds = !no_sigma && params.mu1 < mu1_bar && ell.is_some_and(|l| gap > l);
    Ok(Thm6Certificate {
        k,
        sigma_bar,
        mu1_bar,
        l_of_mu1: ell,
        ell_sigma: ell,
        delta_sigma: delta,
        no_sigma,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedCheck {
    pub species: usize,
    pub status: CheckStatus,
    pub slope: Option<f64>,
    pub c_reduced: Option<f64>,
    pub detail: String,
}

pub const SPEED_TOL_REL: f64 = 0.05;

/// Compares fitted front slopes with the reduced semi-wave speeds
/// `c(mu1, r1(1-k), r1, d1)` and `c(mu2, r2(1-h), r2, d2)`.
pub fn speed_lower_bound_check(
    traj: &Trajectory,
    params: &Params,
) -> Result<Vec<SpeedCheck>, AnalysisError> {
    speed_lower_bound_check_with(
        traj,
        params,
        SPEED_TOL_REL,
        ClassifyCriteria::default().window,
    )
}

pub fn speed_lower_bound_check_with(
    traj: &Trajectory,
    params: &Params,
    tol_rel: f64,
    window: f64,
) -> Result<Vec<SpeedCheck>, AnalysisError> {
    if traj.species != 2 {
        return Err(AnalysisError::NoSuchSpecies(2));
    }
    let mut out = Vec::with_capacity(2);
    let cases = [
        (params.k, params.mu1, params.r1, params.d1),
        (params.h, params.mu2, params.r2, params.d2),
    ];
    for (i, &(comp, mu, r, d)) in cases.iter().enumerate() {
        let species = i + 1;
        if comp >= 1.0 {
            out.push(SpeedCheck {
                species,
                status: CheckStatus::NotApplicable,
                slope: None,
                c_reduced: None,
                detail: format!("competition coefficient {comp} >= 1"),
            });
            continue;
        }
        let sp = semiwave::SemiWaveParams::new(mu, r * (1.0 - comp), r, d)?;
        let c = semiwave::solve_semiwave(&sp, semiwave::DEFAULT_TOL, sp.default_y_max())?.c;
        let slope = fit_front_speed(traj, species, window)?.slope;
        let pass = slope >= (1.0 - tol_rel) * c;
        out.push(SpeedCheck {
            species,
            status: if pass {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            slope: Some(slope),
            c_reduced: Some(c),
            detail: format!("slope / c_reduced = {:.4}", slope / c),
        });
    }
    Ok(out)
}
