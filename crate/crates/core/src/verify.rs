//! Acceptance criteria, grouped into suites.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::analysis::{
    classify, classify_with, coexistence_limits, critical_length, eigen_length, fit_front_speed,
    iteration_bounds, speed_lower_bound_check, thm6_certificate, thm7_delta_max, thresholds,
    CheckStatus, ClassifyCriteria, Label,
};
use crate::fbsolver::field::NEGATIVITY_LIMIT;
use crate::fbsolver::{
    run, solve_single_species, FieldStepper, FrontField, GridSpec, InitialData, SampledProfile,
    Trajectory,
};
use crate::presets::{self, Coupled, Single};
use crate::semiwave::{self, SemiWaveParams};
use crate::Params;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
    pub elapsed_s: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{} {tag} {} ({:.2} s)",
            self.id, self.title, self.elapsed_s
        )?;
        for d in &self.details {
            write!(f, "\n    {d}")?;
        }
        Ok(())
    }
}

/// Collects named sub-checks for one criterion.
struct Tally {
    ok: bool,
    lines: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            ok: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        let msg = msg.into();
        self.lines
            .push(format!("[{}] {msg}", if ok { "ok" } else { "FAILED" }));
        self.ok &= ok;
    }

    fn error(&mut self, what: &str, err: impl fmt::Display) {
        self.check(false, format!("{what}: {err}"));
    }

    fn finish(
        mut self,
        id: &'static str,
        title: &'static str,
        start: Instant,
        limit: Option<Duration>,
    ) -> CriterionResult {
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            self.check(
                elapsed < limit,
                format!(
                    "runtime {:.2} s < {} s",
                    elapsed.as_secs_f64(),
                    limit.as_secs()
                ),
            );
        }
        CriterionResult {
            id,
            title,
            passed: self.ok,
            details: self.lines,
            elapsed_s: elapsed.as_secs_f64(),
        }
    }
}

pub const SUITES: [&str; 8] = [
    "semiwave",
    "dichotomy",
    "coexistence",
    "thm5",
    "thm6",
    "convergence",
    "analytic",
    "all",
];

/// Criteria run by each suite.
pub fn suite_members(suite: &str) -> Option<Vec<&'static str>> {
    let ids = match suite {
        "semiwave" => vec!["AC-1"],
        "dichotomy" => vec!["AC-2", "AC-3"],
        "coexistence" => vec!["AC-4"],
        "thm5" => vec!["AC-5"],
        "thm6" => vec!["AC-6"],
        "convergence" => vec!["AC-7"],
        "analytic" => vec!["AC-8"],
        "all" => vec![
            "AC-1", "AC-2", "AC-3", "AC-4", "AC-5", "AC-6", "AC-7", "AC-8",
        ],
        _ => return None,
    };
    Some(ids)
}

pub fn run_criterion(id: &str) -> Option<CriterionResult> {
    Some(match id {
        "AC-1" => ac1_semiwave_asymptotics(),
        "AC-2" => ac2_single_species_speed(),
        "AC-3" => ac3_dichotomy(),
        "AC-4" => ac4_coexistence(),
        "AC-5" => ac5_fast_strong(),
        "AC-6" => ac6_slow_strong(),
        "AC-7" => ac7_convergence(),
        "AC-8" => ac8_analytic(),
        _ => return None,
    })
}

pub fn run_suite(suite: &str) -> Option<Vec<CriterionResult>> {
    let ids = suite_members(suite)?;
    Some(ids.into_iter().filter_map(run_criterion).collect())
}

fn speed(mu: f64, a: f64, b: f64, d: f64) -> Result<f64, semiwave::SemiwaveError> {
    let p = SemiWaveParams::new(mu, a, b, d)?;
    Ok(semiwave::solve_semiwave(&p, semiwave::DEFAULT_TOL, p.default_y_max())?.c)
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

pub fn ac1_semiwave_asymptotics() -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    match speed(1e4, 1.0, 1.0, 1.0) {
        Ok(c) => t.check(
            (0.90..1.00).contains(&(c / 2.0)),
            format!("c(mu=1e4)/2 = {:.6} in [0.90, 1.00)", c / 2.0),
        ),
        Err(e) => t.error("c(mu=1e4)", e),
    }
    let mu = 1e-3;
    match speed(mu, 1.0, 1.0, 1.0) {
        Ok(c) => {
            let ratio = c / mu;
            t.check(
                (0.52..=0.64).contains(&ratio),
                format!("c(mu=1e-3) b d/(a mu sqrt(ad)) = {ratio:.6} in [0.52, 0.64]"),
            );
        }
        Err(e) => t.error("c(mu=1e-3)", e),
    }
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    let sweep =
        |f: &dyn Fn(f64) -> (f64, f64, f64, f64)| -> Result<Vec<f64>, semiwave::SemiwaveError> {
            grid.iter()
                .map(|&x| {
                    let (mu, a, b, d) = f(x);
                    speed(mu, a, b, d)
                })
                .collect()
        };
    for (name, f, up) in [
        (
            "mu",
            &(|x| (x, 1.0, 1.0, 1.0)) as &dyn Fn(f64) -> (f64, f64, f64, f64),
            true,
        ),
        ("a", &|x| (1.0, x, 1.0, 1.0), true),
        ("b", &|x| (1.0, 1.0, x, 1.0), false),
    ] {
        match sweep(f) {
            Ok(mut cs) => {
                if !up {
                    cs.reverse();
                }
                let dir = if up { "increasing" } else { "decreasing" };
                t.check(increasing(&cs), format!("c {dir} in {name} on {grid:?}"));
            }
            Err(e) => t.error(name, e),
        }
    }
    t.finish(
        "AC-1",
        "semi-wave asymptotics and monotonicity",
        start,
        Some(Duration::from_secs(10)),
    )
}

fn single_stars(s: &Single) -> [f64; 1] {
    [critical_length(s.spec.d, s.spec.r * s.spec.a)]
}

fn invariants_hold(t: &mut Tally, traj: &Trajectory, what: &str) {
    for i in 0..traj.species {
        let st = &traj.stats;
        t.check(
            st.min_advance[i] >= 0.0 && st.max_clip[i] <= NEGATIVITY_LIMIT,
            format!(
                "{what}: species {} front never retreats (min step {:.2e}), clipped negativity {:.2e}",
                i + 1,
                st.min_advance[i],
                st.max_clip[i]
            ),
        );
    }
}

pub fn ac2_single_species_speed() -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let sc = presets::single(2.0, 1.0, 512, 150.0);
    let c = speed(sc.spec.mu, sc.spec.r * sc.spec.a, sc.spec.r, sc.spec.d);
    let traj = solve_single_species(&sc.spec, &sc.grid);
    match (c, traj) {
        (Ok(c), Ok(traj)) => {
            match (
                fit_front_speed(&traj, 1, 0.3),
                fit_front_speed(&traj, 1, 0.15),
            ) {
                (Ok(f), Ok(h)) => {
                    let rel = (f.slope - c).abs() / c;
                    t.check(
                        rel < 0.03,
                        format!(
                            "slope {:.6} vs c {:.6}: rel. error {rel:.2e} < 3%",
                            f.slope, c
                        ),
                    );
                    let dr = (h.drift - f.drift).abs() / f.drift.abs();
                    t.check(
                        dr < 0.05,
                        format!(
                            "drift {:.4} -> {:.4} on halving the window: change {dr:.2e} < 5%",
                            f.drift, h.drift
                        ),
                    );
                }
                (Err(e), _) | (_, Err(e)) => t.error("fit", e),
            }
        }
        (Err(e), _) => t.error("semi-wave", e),
        (_, Err(e)) => t.error("simulation", e),
    }
    t.finish(
        "AC-2",
        "single-species spreading speed",
        start,
        Some(Duration::from_secs(60)),
    )
}

pub fn ac3_dichotomy() -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let crit = ClassifyCriteria::default();
    let vanish = presets::single(0.5, 0.05, 128, 200.0);
    match solve_single_species(&vanish.spec, &vanish.grid) {
        Ok(traj) => {
            let o = classify_with(&traj, &single_stars(&vanish), &crit);
            let last = traj.last();
            t.check(
                o.species[0].label == Label::Vanishing,
                format!("g0 = 0.5, mu = 0.05 labelled {:?}", o.species[0].label),
            );
            t.check(
                last.max[0] < 1e-3,
                format!("max w at t = {} is {:.2e} < 1e-3", last.t, last.max[0]),
            );
            t.check(
                last.s[0] < FRAC_PI_2,
                format!("front {:.6} < pi/2", last.s[0]),
            );
            invariants_hold(&mut t, &traj, "vanishing");
        }
        Err(e) => t.error("vanishing run", e),
    }
    let spread = presets::single(2.0, 1.0, 256, 200.0);
    match solve_single_species(&spread.spec, &spread.grid) {
        Ok(traj) => {
            let o = classify_with(&traj, &single_stars(&spread), &crit);
            t.check(
                o.species[0].label == Label::Spreading,
                format!("g0 = 2 labelled {:?}", o.species[0].label),
            );
            invariants_hold(&mut t, &traj, "spreading");
        }
        Err(e) => t.error("spreading run", e),
    }
    t.finish(
        "AC-3",
        "single-species spreading-vanishing dichotomy",
        start,
        None,
    )
}

fn simulate(c: &Coupled) -> Result<(InitialData, Trajectory), crate::SolverError> {
    let init = c.init.build();
    let traj = run(&c.params, &init, &c.grid)?;
    Ok((init, traj))
}

pub fn ac4_coexistence() -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let sc = presets::coexistence();
    match simulate(&sc) {
        Ok((_, traj)) => {
            let (ul, vl) = coexistence_limits(sc.params.k, sc.params.h).expect("hk < 1");
            let last = traj.last();
            for (name, val, lim) in [("u", last.origin[0], ul), ("v", last.origin[1], vl)] {
                let rel = (val - lim).abs() / lim;
                t.check(
                    rel < 0.02,
                    format!(
                        "{name}(t={}, 0) = {val:.6}, limit {lim:.6}: rel. error {rel:.2e} < 2%",
                        last.t
                    ),
                );
            }
            match speed_lower_bound_check(&traj, &sc.params) {
                Ok(checks) => {
                    for c in checks {
                        t.check(
                            c.status == CheckStatus::Pass,
                            format!(
                                "species {} speed bound: {:?}, {}",
                                c.species, c.status, c.detail
                            ),
                        );
                    }
                }
                Err(e) => t.error("speed check", e),
            }
            invariants_hold(&mut t, &traj, "coexistence");
        }
        Err(e) => t.error("simulation", e),
    }
    t.finish("AC-4", "weak competition coexistence", start, None)
}

pub fn ac5_fast_strong() -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let sc = presets::fast_strong();
    match semiwave::in_region_a(&sc.params) {
        Ok(r) => t.check(
            r.inside,
            format!(
                "c1(mu1, r1(1-k)) = {:.6} > c2(mu2, r2) = {:.6}",
                r.c1_reduced, r.c2_free
            ),
        ),
        Err(e) => t.error("region test", e),
    }
    match simulate(&sc) {
        Ok((_, traj)) => {
            let crit = ClassifyCriteria::default();
            let o = classify(&traj, &thresholds(&sc.params), &crit);
            let last = traj.last();
            t.check(
                o.label(2) == Label::Vanishing,
                format!("species 2 labelled {:?}", o.label(2)),
            );
            t.check(
                last.max[1] < 1e-3,
                format!("max v at t = {} is {:.2e} < 1e-3", last.t, last.max[1]),
            );
            let s2_slope = o.species[1].slope.unwrap_or(f64::NAN);
            t.check(
                s2_slope.abs() < crit.slope_floor,
                format!(
                    "s2 stalls: fitted slope {s2_slope:.2e}, front {:.6}",
                    last.s[1]
                ),
            );
            t.check(
                o.label(1) == Label::Spreading,
                format!("species 1 labelled {:?}", o.label(1)),
            );
            let rel = (last.origin[0] - 1.0).abs();
            t.check(
                rel < 0.02,
                format!("u(t, 0) = {:.6}: rel. error {rel:.2e} < 2%", last.origin[0]),
            );
            invariants_hold(&mut t, &traj, "fast-strong");
        }
        Err(e) => t.error("simulation", e),
    }
    t.finish(
        "AC-5",
        "fast strong competitor excludes the slow weak one",
        start,
        None,
    )
}

pub fn ac6_slow_strong() -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let sc = presets::slow_strong();
    let init = sc.init.build();
    match thm6_certificate(&sc.params, &init) {
        Ok(cert) => {
            t.check(
                cert.holds,
                format!(
                    "certificate: K = {:.6}, mu1 = {} < mu1_bar = {:.6}, gap {} > L(mu1) = {:?}",
                    cert.k,
                    sc.params.mu1,
                    cert.mu1_bar,
                    init.s2_0 - init.s1_0,
                    cert.l_of_mu1
                ),
            );
            if let (true, Some(l)) = (cert.holds, cert.l_of_mu1) {
                match run(&sc.params, &init, &sc.grid) {
                    Ok(traj) => {
                        let sigma = cert.k * sc.params.mu1;
                        let worst = traj
                            .samples
                            .iter()
                            .map(|s| (s.s[1] - (sigma * s.t + init.s1_0 + l), s.t))
                            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
                        t.check(
                            worst.0 >= 0.0,
                            format!(
                                "s2(t) - (K mu1 t + s1_0 + L) >= 0 at all {} snapshots (min {:.4} at t = {})",
                                traj.samples.len(),
                                worst.0,
                                worst.1
                            ),
                        );
                        invariants_hold(&mut t, &traj, "slow-strong");
                    }
                    Err(e) => t.error("simulation", e),
                }
            }
        }
        Err(e) => t.error("certificate", e),
    }
    t.finish("AC-6", "slow strong competitor stays behind", start, None)
}

/// Manufactured solution with the prescribed front `s(t) = 1 + t/2`:
/// `U = A(t) cos(pi xi/2) (1 + xi^2/2)`, `A = 2 s / (3 pi mu)`, which also
/// satisfies the Stefan condition.
pub mod mms {
    use super::*;

    pub const D: f64 = 1.0;
    pub const MU: f64 = 1.0;

    pub fn front(t: f64) -> f64 {
        1.0 + 0.5 * t
    }

    fn amp(t: f64) -> f64 {
        2.0 * front(t) / (3.0 * PI * MU)
    }

    fn shape(xi: f64) -> (f64, f64, f64) {
        let (s, c) = (FRAC_PI_2 * xi).sin_cos();
        let q = 1.0 + 0.5 * xi * xi;
        let phi = c * q;
        let dphi = -FRAC_PI_2 * s * q + xi * c;
        let ddphi = c * (1.0 - PI * PI / 4.0 * q) - PI * xi * s;
        (phi, dphi, ddphi)
    }

    pub fn exact(xi: f64, t: f64) -> f64 {
        amp(t) * shape(xi).0
    }

    /// Source making `exact` solve the mapped equation without reaction.
    pub fn source(xi: f64, t: f64) -> f64 {
        let s = front(t);
        let (phi, dphi, ddphi) = shape(xi);
        let a = amp(t);
        let a_dot = 1.0 / (3.0 * PI * MU);
        a_dot * phi - D / (s * s) * a * ddphi - xi * 0.5 / s * a * dphi
    }

    /// Final mapped profile on `n` intervals.
    pub fn solve(n: usize, dt: f64, t_end: f64) -> Vec<f64> {
        let steps = (t_end / dt).round() as usize;
        let mut field = FrontField {
            s: front(0.0),
            sdot: 0.5,
            w: (0..=n).map(|j| exact(j as f64 / n as f64, 0.0)).collect(),
        };
        let mut st = FieldStepper::new(n);
        let mut rates = vec![0.0; n + 1];
        for k in 0..steps {
            let t = k as f64 * dt;
            for (j, r) in rates.iter_mut().enumerate() {
                *r = source(j as f64 / n as f64, t);
            }
            st.advance_to(&mut field, D, front(t + dt), 0.5, dt, &rates)
                .expect("manufactured solution step");
        }
        field.w
    }

    /// `max |a - b|` on the nodes of the coarser grid.
    pub fn coarse_diff(coarse: &[f64], fine: &[f64]) -> f64 {
        let r = (fine.len() - 1) / (coarse.len() - 1);
        coarse
            .iter()
            .enumerate()
            .map(|(j, &c)| (c - fine[j * r]).abs())
            .fold(0.0, f64::max)
    }

    /// Observed spatial order from three grids `n, 2n, 4n`.
    pub fn spatial_order(n: usize, dt: f64, t_end: f64) -> (f64, f64, f64) {
        let a = solve(n, dt, t_end);
        let b = solve(2 * n, dt, t_end);
        let c = solve(4 * n, dt, t_end);
        let e1 = coarse_diff(&a, &b);
        let e2 = coarse_diff(&b, &c);
        ((e1 / e2).log2(), e1, e2)
    }
}

fn scaled_init(init: &InitialData, lam: f64) -> InitialData {
    let stretch = |p: &SampledProfile| SampledProfile {
        x: p.x.iter().map(|x| lam * x).collect(),
        values: p.values.clone(),
    };
    InitialData {
        s1_0: lam * init.s1_0,
        s2_0: lam * init.s2_0,
        u0: stretch(&init.u0),
        v0: stretch(&init.v0),
    }
}

fn max_gap(a: &Trajectory, b: &Trajectory, lam: f64) -> f64 {
    a.samples
        .iter()
        .zip(&b.samples)
        .flat_map(|(x, y)| {
            (0..2).flat_map(move |i| {
                [
                    (lam * x.s[i] - y.s[i]).abs() / lam,
                    (x.origin[i] - y.origin[i]).abs(),
                ]
            })
        })
        .fold(0.0, f64::max)
}

pub fn ac7_convergence() -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let (p, e1, e2) = mms::spatial_order(32, 1e-4, 0.5);
    t.check(p >= 1.9, format!("manufactured solution: spatial order {p:.3} >= 1.9 (diffs {e1:.3e}, {e2:.3e} on N = 32/64/128)"));

    let params = Params {
        k: 0.7,
        h: 0.4,
        mu1: 1.5,
        mu2: 0.6,
        ..Params::default()
    };
    let init = InitialData::cosine(1.5, 2.0, 1.0, 0.8);
    let lam = 3.0;
    let scaled = Params {
        d1: params.d1 * lam * lam,
        d2: params.d2 * lam * lam,
        mu1: params.mu1 * lam * lam,
        mu2: params.mu2 * lam * lam,
        ..params
    };
    let grid = |n| {
        let mut g = GridSpec {
            n_xi: n,
            dt: 2e-3,
            t_end: 4.0,
            snapshot_stride: 1,
            profile_stride: 1,
        };
        g.fit_strides();
        g
    };
    let runs = (
        run(&params, &init, &grid(64)),
        run(&params, &init, &grid(128)),
        run(&scaled, &scaled_init(&init, lam), &grid(64)),
    );
    match runs {
        (Ok(a), Ok(fine), Ok(b)) => {
            let scheme = max_gap(&a, &fine, 1.0);
            let sym = max_gap(&a, &b, lam);
            t.check(
                sym <= 10.0 * scheme,
                format!("scaling symmetry defect {sym:.3e} <= 10 x scheme error {scheme:.3e}"),
            );
        }
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => t.error("scaling runs", e),
    }
    t.finish(
        "AC-7",
        "scheme convergence and scaling symmetry",
        start,
        None,
    )
}

fn close(t: &mut Tally, name: &str, got: f64, want: f64, tol: f64) {
    t.check(
        (got - want).abs() <= tol,
        format!("{name} = {got:.12} (expected {want:.12})"),
    );
}

pub fn ac8_analytic() -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    let th = thresholds(&Params {
        k: 0.75,
        ..Params::default()
    });
    close(&mut t, "s1_star(d1 = r1 = 1)", th.s1_star, FRAC_PI_2, 1e-14);
    close(
        &mut t,
        "s1_tilde(k = 0.75)",
        th.s1_tilde.unwrap_or(f64::NAN),
        PI,
        1e-14,
    );
    match coexistence_limits(0.5, 0.5) {
        Ok((u, v)) => {
            close(&mut t, "u limit (k = h = 0.5)", u, 2.0 / 3.0, 1e-15);
            close(&mut t, "v limit (k = h = 0.5)", v, 2.0 / 3.0, 1e-15);
        }
        Err(e) => t.error("coexistence limits", e),
    }
    t.check(coexistence_limits(1.0, 1.0).is_err(), "hk = 1 rejected");
    match iteration_bounds(0.5, 0.5, 60) {
        Ok(b) => close(&mut t, "u_60 (k = h = 0.5)", b.u[59], 2.0 / 3.0, 1e-10),
        Err(e) => t.error("iteration bounds", e),
    }
    let mut worst: f64 = 0.0;
    for &(d, r, s, l) in &[
        (1.0, 1.0, 1.0, -0.5),
        (0.3, 2.0, 0.4, -0.7),
        (2.0, 0.5, 1.1, 0.2),
    ] {
        match eigen_length(d, r, s, l) {
            Ok(ell) => {
                let rhs = (4.0 * d * (r + l) - s * s).sqrt() / (2.0 * d);
                worst = worst.max((PI / ell - rhs).abs() / rhs);
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    t.check(
        worst < 1e-14,
        format!("eigen_length round-trip rel. defect {worst:.1e}"),
    );
    match thm7_delta_max(1.0, 1.0, 1.0, 0.5, 0.5) {
        Ok(dl) => {
            close(&mut t, "delta_max", dl, (-1.0 + 2.5f64.sqrt()) / 2.0, 1e-15);
            close(
                &mut t,
                "delta (c + d2 delta)",
                dl * (1.0 + dl),
                0.375,
                1e-15,
            );
        }
        Err(e) => t.error("delta_max", e),
    }
    let formulas = start.elapsed();
    t.check(
        formulas < Duration::from_secs(1),
        format!("formula checks took {:.3} s < 1 s", formulas.as_secs_f64()),
    );

    let sc = presets::persistence();
    match solve_single_species(&sc.spec, &sc.grid) {
        Ok(traj) => {
            let window = sc.persistence_window.unwrap_or(0.0);
            let eps = 0.05;
            let tail = &traj.profiles[traj.profiles.len() / 2..];
            let n = traj.n_xi;
            let inside = (window / sc.spec.g0 * n as f64).floor() as usize;
            let low = tail
                .iter()
                .flat_map(|p| p.w[0][..=inside].iter().copied())
                .fold(f64::INFINITY, f64::min);
            t.check(
                low >= sc.spec.a - eps,
                format!(
                    "fixed interval l = {:.4}: min z on [0, {window:.4}] over t >= {} is {low:.4} >= a - eps = {}",
                    sc.spec.g0,
                    tail[0].t,
                    sc.spec.a - eps
                ),
            );
        }
        Err(e) => t.error("persistence run", e),
    }
    t.finish("AC-8", "analytic formulas and persistence", start, None)
}
