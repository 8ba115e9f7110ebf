use std::f64::consts::{FRAC_PI_2, PI};

use twofront_core::analysis::{
    classify_with, critical_length, fit_line, front_speed_bound, speed_lower_bound_check,
    CheckStatus, SpeciesOutcome,
};
use twofront_core::fbsolver::{
    run, GridSpec, InitialData, RunStats, Sample, SampledProfile, Trajectory,
};
use twofront_core::{
    classify, coexistence_limits, dichotomy_consistency, eigen_length, fit_front_speed,
    iteration_bounds, thm6_certificate, thm7_delta_max, thresholds, AnalysisError,
    ClassifyCriteria, Label, Outcome, Params,
};

fn synthetic(
    species: usize,
    t_end: f64,
    n: usize,
    s: impl Fn(usize, f64) -> f64,
    m: impl Fn(usize, f64) -> f64,
) -> Trajectory {
    let samples = (0..=n)
        .map(|j| {
            let t = t_end * j as f64 / n as f64;
            let f =
                |g: &dyn Fn(usize, f64) -> f64| [g(0, t), if species == 2 { g(1, t) } else { 0.0 }];
            Sample {
                t,
                s: f(&s),
                sdot: [0.0; 2],
                origin: f(&m),
                max: f(&m),
                c1: [0.0; 2],
            }
        })
        .collect();
    Trajectory {
        species,
        n_xi: 32,
        samples,
        profiles: vec![],
        stats: RunStats::default(),
    }
}

#[test]
fn thresholds_match_formula() {
    let t = thresholds(&Params::default());
    assert!((t.s1_star - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    let t = thresholds(&Params {
        k: 0.75,
        ..Params::default()
    });
    assert!((t.s1_tilde.unwrap() - PI).abs() < 1e-12);
    assert!(thresholds(&Params {
        k: 1.0,
        h: 1.2,
        ..Params::default()
    })
    .s1_tilde
    .is_none());
}

#[test]
fn thresholds_scale_with_rates() {
    let p = Params {
        d1: 0.7,
        r1: 1.3,
        k: 0.4,
        h: 0.2,
        d2: 2.0,
        r2: 0.5,
        ..Params::default()
    };
    let q = Params {
        r1: p.r1 / 2.0,
        r2: p.r2 / 2.0,
        ..p
    };
    let (a, b) = (thresholds(&p), thresholds(&q));
    let r2 = std::f64::consts::SQRT_2;
    assert!((b.s1_star / a.s1_star - r2).abs() < 1e-14);
    assert!((b.s2_tilde.unwrap() / a.s2_tilde.unwrap() - r2).abs() < 1e-14);
    assert!(a.s1_tilde.unwrap() > a.s1_star && a.s2_tilde.unwrap() > a.s2_star);
}

#[test]
fn coexistence_values() {
    let (u, v) = coexistence_limits(0.5, 0.5).unwrap();
    assert!((u - 2.0 / 3.0).abs() < 1e-15 && (v - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(coexistence_limits(0.0, 0.0).unwrap(), (1.0, 1.0));
    assert!(matches!(
        coexistence_limits(1.0, 1.0),
        Err(AnalysisError::DegenerateCompetition { .. })
    ));
}

#[test]
fn iteration_first_terms() {
    let b = iteration_bounds(0.5, 0.5, 3).unwrap();
    assert_eq!(b.u[0], 0.5);
    assert_eq!(b.v[1], 0.75);
    assert_eq!(b.u[1], 0.625);
    assert_eq!(b.v[2], 0.6875);
}

#[test]
fn iteration_converges_geometrically() {
    let b = iteration_bounds(0.5, 0.5, 60).unwrap();
    assert!(b.converged);
    assert!((b.u[59] - 2.0 / 3.0).abs() < 1e-10);
    let (k, h) = (0.3, 0.8);
    let b = iteration_bounds(k, h, 30).unwrap();
    for n in 1..10 {
        let e0 = b.u[n - 1] - b.u_limit;
        let e1 = b.u[n] - b.u_limit;
        // lower bounds rise monotonically and the error shrinks by exactly hk
        assert!(e0 < 0.0 && e1 < 0.0);
        assert!((e1 / e0 - h * k).abs() < 1e-6);
    }
}

#[test]
fn iteration_without_competition_on_u() {
    let b = iteration_bounds(0.0, 0.4, 5).unwrap();
    assert!(b.u.iter().all(|&u| u == 1.0));
    assert!(b.v[1..].iter().all(|&v| (v - 0.6).abs() < 1e-15));
}

#[test]
fn slope_fit_with_wiggle() {
    let t: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.05).collect();
    let s: Vec<f64> = t.iter().map(|t| 2.0 * t + 3.0 + 1e-3 * t.sin()).collect();
    let f = fit_line(&t, &s).unwrap();
    assert!((f.slope - 2.0).abs() < 1e-3);
    let traj = synthetic(1, 10.0, 100, |_, t| 2.0 * t + 3.0, |_, _| 1.0);
    let f = fit_front_speed(&traj, 1, 0.3).unwrap();
    assert!(
        (f.slope - 2.0).abs() < 1e-12 && (f.drift - 3.0).abs() < 1e-10 && f.rms_residual < 1e-10
    );
    let short = synthetic(1, 1.0, 4, |_, t| t, |_, _| 1.0);
    assert!(matches!(
        fit_front_speed(&short, 1, 0.3),
        Err(AnalysisError::InsufficientData { .. })
    ));
}

#[test]
fn classifier_labels() {
    let crit = ClassifyCriteria::default();
    let vanish = synthetic(1, 50.0, 500, |_, _| 1.0, |_, t| (-t * 0.3).exp());
    assert!(vanish.last().max[0] < 1e-6);
    assert_eq!(
        classify_with(&vanish, &[FRAC_PI_2], &crit).species[0].label,
        Label::Vanishing
    );

    let spread = synthetic(1, 50.0, 500, |_, t| 0.5 + 0.4 * t, |_, t| 1.0 - (-t).exp());
    assert_eq!(
        classify_with(&spread, &[FRAC_PI_2], &crit).species[0].label,
        Label::Spreading
    );

    let drift = synthetic(1, 50.0, 500, |_, t| 2.0 + 1e-5 * t, |_, _| 0.5);
    assert_eq!(
        classify_with(&drift, &[FRAC_PI_2], &crit).species[0].label,
        Label::Indeterminate
    );
}

#[test]
fn classifier_labels_are_exclusive_and_deterministic() {
    let crit = ClassifyCriteria::default();
    let traj = synthetic(
        2,
        20.0,
        200,
        |i, t| 2.0 + (i as f64 + 0.1) * t,
        |i, t| if i == 0 { 1.0 } else { (-t).exp() },
    );
    let th = thresholds(&Params::default());
    let a = classify(&traj, &th, &crit);
    assert_eq!(a, classify(&traj, &th, &crit));
    assert_eq!(a.label(1), Label::Spreading);
    assert_eq!(a.label(2), Label::Vanishing);
}

fn outcome(labels: [Label; 2]) -> Outcome {
    Outcome {
        t_end: 1.0,
        species: labels
            .iter()
            .map(|&label| SpeciesOutcome {
                label,
                final_front: 0.0,
                final_max: 0.0,
                slope: None,
                drift: None,
                threshold: 0.0,
                window: 0.3,
            })
            .collect(),
    }
}

fn status(checks: &[twofront_core::analysis::Check], name: &str) -> CheckStatus {
    checks.iter().find(|c| c.name == name).unwrap().status
}

#[test]
fn dichotomy_vanishing_above_threshold_fails() {
    let th = thresholds(&Params::default());
    let traj = synthetic(2, 10.0, 100, |_, _| 2.0, |_, _| 0.0);
    let checks = dichotomy_consistency(&outcome([Label::Vanishing; 2]), &th, &traj);
    assert_eq!(
        status(&checks, "stalled-above-critical-1"),
        CheckStatus::Fail
    );
    assert_eq!(status(&checks, "one-large-start"), CheckStatus::Fail);
}

#[test]
fn dichotomy_both_large_passes() {
    let p = Params {
        k: 0.5,
        h: 0.5,
        ..Params::default()
    };
    let th = thresholds(&p);
    let s0 = th.s1_tilde.unwrap().max(th.s2_tilde.unwrap()) + 0.1;
    let traj = synthetic(2, 10.0, 100, |_, t| s0 + t, |_, _| 0.6);
    let checks = dichotomy_consistency(&outcome([Label::Spreading; 2]), &th, &traj);
    assert_eq!(status(&checks, "both-large-start"), CheckStatus::Pass);
    assert!(checks.iter().all(|c| c.status != CheckStatus::Fail));
}

#[test]
fn dichotomy_unobserved_hypothesis() {
    let th = thresholds(&Params::default());
    let traj = synthetic(2, 10.0, 100, |_, _| 1.0, |_, _| 0.5);
    let checks = dichotomy_consistency(&outcome([Label::Indeterminate; 2]), &th, &traj);
    assert!(checks
        .iter()
        .all(|c| c.status == CheckStatus::NotApplicable));
}

fn cosine_init(s1: f64, s2: f64, n: usize) -> InitialData {
    InitialData {
        s1_0: s1,
        s2_0: s2,
        u0: SampledProfile::cosine(s1, 1.0, n),
        v0: SampledProfile::cosine(s2, 1.0, n),
    }
}

#[test]
fn speed_bound_for_cosine_data() {
    // u0 = cos(pi x/2) on [0, 1]: sup 1 and min u0' = -pi/2 analytically
    let init = cosine_init(1.0, 7.0, 1024);
    let k = front_speed_bound(&Params::default(), &init);
    let expected = 2.0 * (0.5f64.sqrt()).max(FRAC_PI_2);
    assert!((k - expected).abs() < 1e-5);
}

#[test]
fn speed_bound_stable_under_refinement() {
    let p = Params::default();
    let coarse = front_speed_bound(&p, &cosine_init(1.0, 7.0, 512));
    for n in [1024, 4096] {
        let fine = front_speed_bound(&p, &cosine_init(1.0, 7.0, n));
        assert!((fine - coarse).abs() < 0.01 * coarse);
    }
}

#[test]
fn certificate_length_at_small_mu1() {
    let p = Params {
        mu1: 0.1,
        mu2: 2.0,
        ..Params::default()
    };
    let cert = thm6_certificate(&p, &cosine_init(1.0, 7.0, 1024)).unwrap();
    let sigma = cert.k * 0.1;
    let l = 2.0 * PI / (2.0 - sigma * sigma).sqrt();
    assert!((cert.l_of_mu1.unwrap() - l).abs() < 1e-12);
    assert!((l - 4.557).abs() < 2e-3);
    assert!(cert.sigma_bar < 2f64.sqrt());
    assert!(!cert.no_sigma);
}

#[test]
fn certificate_undefined_for_large_mu1() {
    let p = Params {
        mu1: 1.0,
        ..Params::default()
    };
    let cert = thm6_certificate(&p, &cosine_init(1.0, 7.0, 512)).unwrap();
    assert!(cert.k * p.mu1 >= 2f64.sqrt());
    assert!(cert.l_of_mu1.is_none());
    assert!(!cert.holds);
}

#[test]
fn certificate_rejects_inverted_fronts() {
    let err = thm6_certificate(&Params::default(), &cosine_init(3.0, 2.0, 256)).unwrap_err();
    assert!(matches!(err, AnalysisError::GapTooSmall { .. }));
}

#[test]
fn certificate_without_room() {
    // gap far below the smallest barrier length: no sigma can work
    let cert = thm6_certificate(
        &Params {
            mu1: 0.01,
            ..Params::default()
        },
        &cosine_init(1.0, 2.0, 256),
    )
    .unwrap();
    assert!(cert.no_sigma);
    assert_eq!(cert.sigma_bar, 0.0);
    assert!(!cert.holds);
}

#[test]
fn eigen_length_examples() {
    assert!((eigen_length(1.0, 1.0, 1.0, -0.5).unwrap() - 2.0 * PI).abs() < 1e-14);
    assert!((eigen_length(1.0, 1.0, 0.0, 0.0).unwrap() - PI).abs() < 1e-15);
    assert!(matches!(
        eigen_length(1.0, 1.0, 2.0, 0.0),
        Err(AnalysisError::ImaginaryRoot(_))
    ));
}

#[test]
fn eigen_length_round_trip() {
    for &(d, r, s, l) in &[
        (0.3, 2.0, 0.4, -0.7),
        (2.0, 0.5, 1.1, 0.2),
        (1.0, 1.0, 0.0, 3.0),
    ] {
        let ell = eigen_length(d, r, s, l).unwrap();
        let rhs = (4.0 * d * (r + l) - s * s).sqrt() / (2.0 * d);
        assert!((PI / ell - rhs).abs() < 1e-14 * rhs);
    }
}

#[test]
fn delta_max_examples() {
    let d = thm7_delta_max(1.0, 1.0, 1.0, 0.5, 0.5).unwrap();
    assert!((d - (-1.0 + 2.5f64.sqrt()) / 2.0).abs() < 1e-15);
    assert!((d - 0.29057).abs() < 1e-5);
    let d = thm7_delta_max(1.3, 0.7, 2.0, 1.0, 0.9).unwrap();
    assert!((d * (1.3 + 0.7 * d) - 1.0).abs() < 1e-14);
    assert!(matches!(
        thm7_delta_max(1.0, 1.0, 1.0, 0.5, 2.0),
        Err(AnalysisError::InfeasibleBarrier(_))
    ));
}

#[test]
fn speed_check_flags_slow_fronts() {
    let p = Params {
        k: 0.5,
        h: 0.5,
        ..Params::default()
    };
    // c(1, 0.5, 1, 1) is somewhere below the free speed; half of the
    // free-space bound 2 sqrt(0.5) is far too fast, an eighth far too slow
    let fast = synthetic(2, 50.0, 500, |_, t| 2.0 + 0.7 * t, |_, _| 0.6);
    let checks = speed_lower_bound_check(&fast, &p).unwrap();
    assert!(checks.iter().all(|c| c.status == CheckStatus::Pass));
    let c = checks[0].c_reduced.unwrap();
    let slow = synthetic(2, 50.0, 500, |_, t| 2.0 + 0.5 * c * t, |_, _| 0.6);
    let checks = speed_lower_bound_check(&slow, &p).unwrap();
    assert!(checks.iter().all(|c| c.status == CheckStatus::Fail));

    let strong = Params { k: 1.5, ..p };
    let checks = speed_lower_bound_check(&fast, &strong).unwrap();
    assert_eq!(checks[0].status, CheckStatus::NotApplicable);
    assert_eq!(checks[1].status, CheckStatus::Pass);
}

#[test]
fn simulated_front_obeys_linear_bound() {
    let p = Params {
        mu1: 1.5,
        k: 0.6,
        h: 0.8,
        ..Params::default()
    };
    let init = cosine_init(1.0, 3.0, 1024);
    let k = front_speed_bound(&p, &init);
    let mut g = GridSpec {
        n_xi: 128,
        dt: 1e-3,
        t_end: 10.0,
        snapshot_stride: 1,
        profile_stride: 1,
    };
    g.fit_strides();
    let traj = run(&p, &init, &g).unwrap();
    for s in &traj.samples {
        assert!(s.s[0] <= k * p.mu1 * s.t + init.s1_0 + 1e-3, "{s:?}");
    }
}

#[test]
fn critical_length_single_species() {
    assert!((critical_length(1.0, 0.25) - PI).abs() < 1e-15);
}
