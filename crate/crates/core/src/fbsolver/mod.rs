//! Time stepping of the free-boundary competition system
//!
//! ```text
//! u_t - d1 u_xx = r1 u (1 - u - k v),   0 < x < s1(t),   s1' = -mu1 u_x(t, s1)
//! v_t - d2 v_xx = r2 v (1 - v - h u),   0 < x < s2(t),   s2' = -mu2 v_x(t, s2)
//! ```
//!
//! with Neumann conditions at `x = 0` and each species identically zero beyond
//! its own front, and of the single-species problem `w_t - d w_xx = r w (a - w)`.
//! Each species lives on its own front-fixed grid; see [`field`].

pub mod field;
mod interp;
pub mod io;
mod tridiag;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use field::{boundary_flux, cross_interpolate, FieldFault, FieldStepper, FrontField};
pub use interp::Pchip;

use crate::{ParamError, Params};

/// Default limit on the monitored C1 norms and front speeds.
pub const WATCHDOG_LIMIT: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("bad initial data: {0}")]
    BadInitialData(String),
    #[error("non-finite value in species {species} at t = {t}")]
    NumericalBlowup { t: f64, species: usize },
    #[error("species {species} fell to {value:e} at t = {t}")]
    NegativityBreach { t: f64, species: usize, value: f64 },
    #[error("front {species} moved backwards ({from} -> {to}) at t = {t}")]
    FrontCollapse {
        t: f64,
        species: usize,
        from: f64,
        to: f64,
    },
}

impl SolverError {
    fn from_fault(fault: FieldFault, t: f64, species: usize) -> Self {
        match fault {
            FieldFault::NonFinite => SolverError::NumericalBlowup { t, species },
            FieldFault::Negative(value) => SolverError::NegativityBreach { t, species, value },
            FieldFault::Backward { from, to } => SolverError::FrontCollapse {
                t,
                species,
                from,
                to,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Intervals on the unit mapped domain of each species (nodes = n_xi + 1).
    pub n_xi: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Record a scalar sample every this many steps.
    pub snapshot_stride: usize,
    /// Record a profile every this many scalar samples (the first and last
    /// samples always carry a profile).
    pub profile_stride: usize,
}

impl GridSpec {
    pub const MIN_NODES: usize = 32;
    pub const MAX_SNAPSHOTS: usize = 2000;
    pub const DEFAULT_N_XI: usize = 256;

    /// Defaults for a run to `t_end` with largest growth rate `r_max`.
    pub fn with_defaults(t_end: f64, r_max: f64) -> Self {
        let dt = 1e-3f64.min(0.25 / r_max);
        let mut g = GridSpec {
            n_xi: Self::DEFAULT_N_XI,
            dt,
            t_end,
            snapshot_stride: 1,
            profile_stride: 1,
        };
        g.fit_strides();
        g
    }

    /// Chooses strides giving at most [`Self::MAX_SNAPSHOTS`] samples and about 20 profiles.
    pub fn fit_strides(&mut self) {
        let steps = self.n_steps().max(1);
        self.snapshot_stride = steps.div_ceil(Self::MAX_SNAPSHOTS).max(1);
        let samples = steps.div_ceil(self.snapshot_stride);
        self.profile_stride = samples.div_ceil(20).max(1);
    }

    pub fn n_steps(&self) -> usize {
        if self.t_end <= 0.0 {
            0
        } else {
            (self.t_end / self.dt - 1e-9).ceil() as usize
        }
    }

    pub fn validate(&self, r_max: f64) -> Result<(), SolverError> {
        if self.n_xi < Self::MIN_NODES {
            return Err(SolverError::BadGrid(format!(
                "n_xi = {} < {}",
                self.n_xi,
                Self::MIN_NODES
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SolverError::BadGrid(format!(
                "dt = {} must be positive",
                self.dt
            )));
        }
        if self.dt * r_max >= 0.5 {
            return Err(SolverError::BadGrid(format!(
                "dt * max(r) = {} violates the reaction guard (< 0.5)",
                self.dt * r_max
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(SolverError::BadGrid(format!(
                "t_end = {} must be >= 0",
                self.t_end
            )));
        }
        if self.snapshot_stride == 0 || self.profile_stride == 0 {
            return Err(SolverError::BadGrid("strides must be positive".into()));
        }
        Ok(())
    }
}

/// A profile sampled on `[0, s0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledProfile {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledProfile {
    /// `n` uniform intervals on `[0, s0]`; the last value is forced to zero.
    pub fn from_fn(s0: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let x: Vec<f64> = (0..=n).map(|i| s0 * i as f64 / n as f64).collect();
        let mut values: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        values[n] = 0.0;
        SampledProfile { x, values }
    }

    /// `amp * cos(pi x / (2 s0))`.
    pub fn cosine(s0: f64, amp: f64, n: usize) -> Self {
        Self::from_fn(s0, n, |x| {
            amp * (std::f64::consts::FRAC_PI_2 * x / s0).cos()
        })
    }

    /// `amp * (1 - (x/s0)^2)`.
    pub fn bump(s0: f64, amp: f64, n: usize) -> Self {
        Self::from_fn(s0, n, |x| amp * (1.0 - (x / s0).powi(2)))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Piecewise-linear value at `x`, zero outside the sampled range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        if !(x >= self.x[0] && x <= self.x[n - 1]) {
            return 0.0;
        }
        let i = self.x.partition_point(|&v| v <= x).clamp(1, n - 1);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let f = (x - x0) / (x1 - x0);
        self.values[i - 1] + f * (self.values[i] - self.values[i - 1])
    }

    /// Discrete derivative: centred inside, second-order one-sided at the ends.
    pub fn derivative(&self) -> Vec<f64> {
        let (x, y) = (&self.x, &self.values);
        let n = x.len();
        let mut out = vec![0.0; n];
        if n < 3 {
            let s = (y[n - 1] - y[0]) / (x[n - 1] - x[0]);
            return vec![s; n];
        }
        for i in 1..n - 1 {
            out[i] = (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
        }
        let h0 = x[1] - x[0];
        let h1 = x[2] - x[1];
        out[0] = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * y[0] + (h0 + h1) / (h0 * h1) * y[1]
            - h0 / (h1 * (h0 + h1)) * y[2];
        let hm = x[n - 1] - x[n - 2];
        let hm1 = x[n - 2] - x[n - 3];
        out[n - 1] = (2.0 * hm + hm1) / (hm * (hm + hm1)) * y[n - 1]
            - (hm + hm1) / (hm * hm1) * y[n - 2]
            + hm / (hm1 * (hm + hm1)) * y[n - 3];
        out
    }

    /// Checks the admissibility conditions on `[0, s0]`.
    pub fn validate(&self, s0: f64, name: &str) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::BadInitialData(format!("{name}: {msg}")));
        let n = self.x.len();
        if n < 3 || self.values.len() != n {
            return bad(format!("need >= 3 samples with matching lengths (got {n})"));
        }
        if !(s0 > 0.0 && s0.is_finite()) {
            return bad(format!("front {s0} must be positive"));
        }
        let scale = 1e-12 * s0;
        if self.x[0].abs() > scale || (self.x[n - 1] - s0).abs() > scale {
            return bad(format!("samples must span [0, {s0}]"));
        }
        if self.x.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("sample positions must be strictly increasing".into());
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad("non-finite value".into());
        }
        if let Some(i) = self.values[..n - 1].iter().position(|&v| v <= 0.0) {
            return bad(format!(
                "must be positive on [0, s0) (sample {i} = {})",
                self.values[i]
            ));
        }
        if self.values[n - 1].abs() > 1e-12 {
            return bad(format!(
                "must vanish at the front (got {})",
                self.values[n - 1]
            ));
        }
        // Slope at 0 compared with what the interior curvature can explain.
        let y = &self.values;
        let h0 = self.x[1] - self.x[0];
        let slope0 = (y[1] - y[0]) / h0;
        let curvature = (1..n - 1)
            .map(|i| {
                let hl = self.x[i] - self.x[i - 1];
                let hr = self.x[i + 1] - self.x[i];
                let d2 = 2.0 * ((y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl) / (hl + hr);
                d2.abs()
            })
            .take(((n - 1) / 2).max(1))
            .fold(0.0, f64::max);
        if slope0.abs() > h0 * curvature + 1e-9 {
            return bad(format!("slope at x = 0 is {slope0}, expected zero"));
        }
        Ok(())
    }

    /// Resamples onto `n + 1` mapped nodes `xi_j = j/n` by monotone cubic interpolation.
    pub fn to_mapped(&self, s0: f64, n: usize) -> Vec<f64> {
        let p = Pchip::new(&self.x, &self.values);
        let mut out: Vec<f64> = (0..=n)
            .map(|j| p.eval(s0 * j as f64 / n as f64).max(0.0))
            .collect();
        out[n] = 0.0;
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub s1_0: f64,
    pub s2_0: f64,
    pub u0: SampledProfile,
    pub v0: SampledProfile,
}

impl InitialData {
    pub fn cosine(s1_0: f64, s2_0: f64, u_amp: f64, v_amp: f64) -> Self {
        InitialData {
            s1_0,
            s2_0,
            u0: SampledProfile::cosine(s1_0, u_amp, 1024),
            v0: SampledProfile::cosine(s2_0, v_amp, 1024),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        self.u0.validate(self.s1_0, "u0")?;
        self.v0.validate(self.s2_0, "v0")
    }
}

/// Both species at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub u: FrontField,
    pub v: FrontField,
}

impl State {
    pub fn s1(&self) -> f64 {
        self.u.s
    }
    pub fn s2(&self) -> f64 {
        self.v.s
    }
}

pub fn init_state(
    params: &Params,
    init: &InitialData,
    grid: &GridSpec,
) -> Result<State, SolverError> {
    params.validate()?;
    grid.validate(params.r1.max(params.r2))?;
    init.validate()?;
    let n = grid.n_xi;
    Ok(State {
        t: 0.0,
        u: FrontField::initial(init.s1_0, init.u0.to_mapped(init.s1_0, n), params.mu1),
        v: FrontField::initial(init.s2_0, init.v0.to_mapped(init.s2_0, n), params.mu2),
    })
}

/// Per-step bookkeeping of the monitored invariants.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepInfo {
    pub clipped: [f64; 2],
    pub advance: [f64; 2],
}

/// Stepping workspace for the coupled system.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: Params,
    dt: f64,
    field: FieldStepper,
    rates_u: Vec<f64>,
    rates_v: Vec<f64>,
}

impl Stepper {
    pub fn new(params: &Params, grid: &GridSpec) -> Self {
        let n = grid.n_xi;
        Stepper {
            params: *params,
            dt: grid.dt,
            field: FieldStepper::new(n),
            rates_u: vec![0.0; n + 1],
            rates_v: vec![0.0; n + 1],
        }
    }

    pub fn advance(&mut self, state: &mut State) -> Result<StepInfo, SolverError> {
        let p = &self.params;
        let n = state.u.n_intervals();
        let (u, v) = (&state.u, &state.v);
        let ratio_uv = u.s / v.s;
        let ratio_vu = v.s / u.s;
        for j in 0..=n {
            let xi = j as f64 / n as f64;
            let vx = cross_at_mapped(&v.w, xi * ratio_uv);
            let ux = cross_at_mapped(&u.w, xi * ratio_vu);
            self.rates_u[j] = p.r1 * u.w[j] * (1.0 - u.w[j] - p.k * vx);
            self.rates_v[j] = p.r2 * v.w[j] * (1.0 - v.w[j] - p.h * ux);
        }
        let t = state.t;
        let su = self
            .field
            .advance(&mut state.u, p.d1, p.mu1, self.dt, &self.rates_u)
            .map_err(|f| SolverError::from_fault(f, t, 1))?;
        let sv = self
            .field
            .advance(&mut state.v, p.d2, p.mu2, self.dt, &self.rates_v)
            .map_err(|f| SolverError::from_fault(f, t, 2))?;
        state.t += self.dt;
        Ok(StepInfo {
            clipped: [su.clipped, sv.clipped],
            advance: [su.advance, sv.advance],
        })
    }
}

// Linear interpolation at mapped coordinate `xi` of a profile, zero for xi >= 1.
#[inline]
fn cross_at_mapped(profile: &[f64], xi: f64) -> f64 {
    cross_interpolate(profile, 1.0, xi)
}

/// Advance the coupled system by one step of `grid.dt`.
pub fn step(state: &State, params: &Params, grid: &GridSpec) -> Result<State, SolverError> {
    let mut next = state.clone();
    Stepper::new(params, grid).advance(&mut next)?;
    Ok(next)
}

/// One scalar sample of a trajectory. Index 0 is species 1 (`u`), index 1 is
/// species 2 (`v`); single-species runs leave index 1 at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub s: [f64; 2],
    pub sdot: [f64; 2],
    pub origin: [f64; 2],
    pub max: [f64; 2],
    pub c1: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSnapshot {
    pub t: f64,
    pub s: [f64; 2],
    /// Mapped profiles, one per species.
    pub w: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    /// Largest value clipped to zero over the run.
    pub max_clip: [f64; 2],
    /// Smallest per-step front advance (never negative).
    pub min_advance: [f64; 2],
    /// Steps in which a front failed to move while its front-adjacent value was positive.
    pub stalled_steps: [usize; 2],
    /// Time at which a C1 norm or front speed first exceeded [`WATCHDOG_LIMIT`].
    pub watchdog_fired_at: Option<f64>,
}

impl Default for RunStats {
    fn default() -> Self {
        RunStats {
            steps: 0,
            max_clip: [0.0; 2],
            min_advance: [f64::INFINITY; 2],
            stalled_steps: [0; 2],
            watchdog_fired_at: None,
        }
    }
}

impl RunStats {
    fn record(&mut self, info: &StepInfo, fields: &[&FrontField]) {
        self.steps += 1;
        for (i, f) in fields.iter().enumerate() {
            self.max_clip[i] = self.max_clip[i].max(info.clipped[i]);
            self.min_advance[i] = self.min_advance[i].min(info.advance[i]);
            let n = f.n_intervals();
            if info.advance[i] <= 0.0 && f.w[n - 1] > 0.0 {
                self.stalled_steps[i] += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// 1 for single-species runs, 2 for the coupled system.
    pub species: usize,
    pub n_xi: usize,
    pub samples: Vec<Sample>,
    pub profiles: Vec<ProfileSnapshot>,
    pub stats: RunStats,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Front series of species `i` (1-based).
    pub fn fronts(&self, species: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.s[species - 1]).collect()
    }

    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory has at least the initial sample")
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }
}

struct Recorder {
    traj: Trajectory,
    snapshot_stride: usize,
    profile_stride: usize,
}

impl Recorder {
    fn new(species: usize, grid: &GridSpec) -> Self {
        Recorder {
            traj: Trajectory {
                species,
                n_xi: grid.n_xi,
                samples: Vec::new(),
                profiles: Vec::new(),
                stats: RunStats::default(),
            },
            snapshot_stride: grid.snapshot_stride,
            profile_stride: grid.profile_stride,
        }
    }

    fn sample(&mut self, t: f64, fields: &[&FrontField], force_profile: bool) {
        let mut s = Sample {
            t,
            s: [0.0; 2],
            sdot: [0.0; 2],
            origin: [0.0; 2],
            max: [0.0; 2],
            c1: [0.0; 2],
        };
        for (i, f) in fields.iter().enumerate() {
            s.s[i] = f.s;
            s.sdot[i] = f.sdot;
            s.origin[i] = f.origin();
            s.max[i] = f.max();
            s.c1[i] = f.c1_norm();
            let watched = s.c1[i].max(s.sdot[i].abs());
            if !(watched <= WATCHDOG_LIMIT) && self.traj.stats.watchdog_fired_at.is_none() {
                self.traj.stats.watchdog_fired_at = Some(t);
            }
        }
        let index = self.traj.samples.len();
        self.traj.samples.push(s);
        if force_profile || index.is_multiple_of(self.profile_stride) {
            self.push_profile(t, fields);
        }
    }

    fn push_profile(&mut self, t: f64, fields: &[&FrontField]) {
        if self.traj.profiles.last().is_some_and(|p| p.t == t) {
            return;
        }
        let mut s = [0.0; 2];
        for (i, f) in fields.iter().enumerate() {
            s[i] = f.s;
        }
        self.traj.profiles.push(ProfileSnapshot {
            t,
            s,
            w: fields.iter().map(|f| f.w.clone()).collect(),
        });
    }
}

/// Runs the coupled system to `grid.t_end`.
pub fn run(
    params: &Params,
    init: &InitialData,
    grid: &GridSpec,
) -> Result<Trajectory, SolverError> {
    let mut state = init_state(params, init, grid)?;
    let mut stepper = Stepper::new(params, grid);
    let mut rec = Recorder::new(2, grid);
    rec.sample(0.0, &[&state.u, &state.v], true);
    let n_steps = grid.n_steps();
    for k in 1..=n_steps {
        let info = stepper.advance(&mut state)?;
        state.t = k as f64 * grid.dt;
        rec.traj.stats.record(&info, &[&state.u, &state.v]);
        let last = k == n_steps;
        if k % rec.snapshot_stride == 0 || last {
            rec.sample(state.t, &[&state.u, &state.v], last);
        }
    }
    Ok(rec.traj)
}

/// Data of the single-species problem started at time `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleSpeciesSpec {
    pub tau: f64,
    pub d: f64,
    pub r: f64,
    pub a: f64,
    pub mu: f64,
    pub g0: f64,
    pub w0: SampledProfile,
}

impl SingleSpeciesSpec {
    pub fn cosine(d: f64, r: f64, a: f64, mu: f64, g0: f64, amp: f64) -> Self {
        SingleSpeciesSpec {
            tau: 0.0,
            d,
            r,
            a,
            mu,
            g0,
            w0: SampledProfile::cosine(g0, amp, 1024),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !self.tau.is_finite() {
            return Err(ParamError::new("tau", "must be finite").into());
        }
        for (name, v) in [("d", self.d), ("r", self.r), ("a", self.a), ("g0", self.g0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ParamError::new(name, "must be > 0").into());
            }
        }
        // mu = 0 freezes the boundary (fixed domain)
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(ParamError::new("mu", "must be >= 0").into());
        }
        self.w0.validate(self.g0, "w0")
    }
}

/// Runs `w_t - d w_xx = r w (a - w)` with Stefan front `g' = -mu w_x` from
/// `t = tau` to `t = tau + grid.t_end`.
pub fn solve_single_species(
    spec: &SingleSpeciesSpec,
    grid: &GridSpec,
) -> Result<Trajectory, SolverError> {
    spec.validate()?;
    grid.validate(spec.r)?;
    let n = grid.n_xi;
    let mut field = FrontField::initial(spec.g0, spec.w0.to_mapped(spec.g0, n), spec.mu);
    let mut stepper = FieldStepper::new(n);
    let mut rates = vec![0.0; n + 1];
    let mut rec = Recorder::new(1, grid);
    rec.sample(spec.tau, &[&field], true);
    let n_steps = grid.n_steps();
    for k in 1..=n_steps {
        let t_old = spec.tau + (k - 1) as f64 * grid.dt;
        for (rate, &w) in rates.iter_mut().zip(&field.w) {
            *rate = spec.r * w * (spec.a - w);
        }
        let st = stepper
            .advance(&mut field, spec.d, spec.mu, grid.dt, &rates)
            .map_err(|f| SolverError::from_fault(f, t_old, 1))?;
        let info = StepInfo {
            clipped: [st.clipped, 0.0],
            advance: [st.advance, 0.0],
        };
        rec.traj.stats.record(&info, &[&field]);
        let last = k == n_steps;
        if k % rec.snapshot_stride == 0 || last {
            rec.sample(spec.tau + k as f64 * grid.dt, &[&field], last);
        }
    }
    Ok(rec.traj)
}
