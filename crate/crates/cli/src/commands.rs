use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use twofront_core::analysis::{classify_with, critical_length};
use twofront_core::fbsolver::io::{write_profiles_csv, write_trajectory_csv};
use twofront_core::presets::{self, Scenario, Single};
use twofront_core::semiwave::{self, SemiWave, SemiWaveParams};
use twofront_core::verify::{self, CriterionResult};
use twofront_core::{
    classify, dichotomy_consistency, run, solve_single_species, speed_lower_bound_check,
    thm6_certificate, thresholds, ClassifyCriteria, InitialData, Label, Outcome, Params,
    Trajectory,
};

use crate::config::{self, RunSpec};
use crate::svg::{self, Series};
use crate::CliError;

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn csv_bytes(traj: &Trajectory, profiles: bool) -> Vec<u8> {
    let mut buf = Vec::new();
    let res = if profiles {
        write_profiles_csv(traj, &mut buf)
    } else {
        write_trajectory_csv(traj, &mut buf)
    };
    res.expect("writing to memory");
    buf
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn or_error<T: serde::Serialize, E: std::fmt::Display>(r: Result<T, E>) -> Value {
    match r {
        Ok(v) => to_json(&v),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub dir: PathBuf,
    pub indeterminate: bool,
    pub summary: Value,
}

/// Classification plus every applicable check for a finished two-species run.
pub fn coupled_summary(params: &Params, init: &InitialData, traj: &Trajectory) -> (Outcome, Value) {
    let th = thresholds(params);
    let outcome = classify(traj, &th, &ClassifyCriteria::default());
    let summary = json!({
        "t_end": traj.last().t,
        "thresholds": to_json(&th),
        "outcome": to_json(&outcome),
        "dichotomy": to_json(&dichotomy_consistency(&outcome, &th, traj)),
        "speed_lower_bound": or_error(speed_lower_bound_check(traj, params)),
        "thm6_certificate": or_error(thm6_certificate(params, init)),
        "stats": to_json(&traj.stats),
    });
    (outcome, summary)
}

fn fronts_svg(traj: &Trajectory) -> String {
    let t = traj.times();
    let fronts: Vec<Vec<f64>> = (1..=traj.species).map(|i| traj.fronts(i)).collect();
    let names = ["s1", "s2"];
    let series: Vec<Series> = fronts
        .iter()
        .enumerate()
        .map(|(i, s)| Series {
            name: names[i],
            x: &t,
            y: s,
        })
        .collect();
    svg::line_plot("Front positions", "t", "s(t)", &series)
}

fn profiles_svg(traj: &Trajectory) -> Option<String> {
    let last = traj.profiles.last()?;
    let n = traj.n_xi;
    let xs: Vec<Vec<f64>> = (0..traj.species)
        .map(|i| (0..=n).map(|j| last.s[i] * j as f64 / n as f64).collect())
        .collect();
    let names = ["u", "v"];
    let series: Vec<Series> = (0..traj.species)
        .map(|i| Series {
            name: names[i],
            x: &xs[i],
            y: &last.w[i],
        })
        .collect();
    Some(svg::line_plot(
        &format!("Profiles at t = {:.3}", last.t),
        "x",
        "density",
        &series,
    ))
}

fn write_outputs(
    dir: &Path,
    traj: &Trajectory,
    summary: &Value,
    with_svg: bool,
) -> Result<(), CliError> {
    ensure_dir(dir)?;
    write_file(&dir.join("trajectory.csv"), csv_bytes(traj, false))?;
    write_file(&dir.join("profiles.csv"), csv_bytes(traj, true))?;
    write_file(
        &dir.join("outcome.json"),
        serde_json::to_string_pretty(summary).expect("json"),
    )?;
    if with_svg {
        write_file(&dir.join("fronts.svg"), fronts_svg(traj))?;
        if let Some(p) = profiles_svg(traj) {
            write_file(&dir.join("profiles.svg"), p)?;
        }
    }
    Ok(())
}

pub fn simulate(spec: &RunSpec) -> Result<SimReport, CliError> {
    let init = spec.init.build();
    let traj = run(&spec.params, &init, &spec.grid)?;
    let (outcome, mut summary) = coupled_summary(&spec.params, &init, &traj);
    summary["preset"] = json!(spec.preset);
    let dir = &spec.outputs.dir;
    write_outputs(dir, &traj, &summary, spec.outputs.svg)?;
    write_file(&dir.join("spec.json"), config::echo(spec))?;
    Ok(SimReport {
        dir: dir.clone(),
        indeterminate: outcome.any_indeterminate(),
        summary,
    })
}

/// Smallest value on `[0, window]` over the second half of the stored profiles.
pub fn persistence_floor(traj: &Trajectory, front: f64, window: f64) -> f64 {
    let n = traj.n_xi;
    let inside = ((window / front) * n as f64).floor() as usize;
    let tail = &traj.profiles[traj.profiles.len() / 2..];
    tail.iter()
        .flat_map(|p| p.w[0][..=inside.min(n)].iter().copied())
        .fold(f64::INFINITY, f64::min)
}

pub fn simulate_single(
    name: &str,
    sc: &Single,
    dir: &Path,
    with_svg: bool,
) -> Result<SimReport, CliError> {
    let traj = solve_single_species(&sc.spec, &sc.grid)?;
    let star = critical_length(sc.spec.d, sc.spec.r * sc.spec.a);
    let outcome = classify_with(&traj, &[star], &ClassifyCriteria::default());
    let mut summary = json!({
        "preset": name,
        "t_end": traj.last().t,
        "threshold": star,
        "outcome": to_json(&outcome),
        "stats": to_json(&traj.stats),
    });
    if let Some(window) = sc.persistence_window {
        let floor = persistence_floor(&traj, sc.spec.g0, window);
        summary["persistence"] =
            json!({ "window": window, "min_value": floor, "level": sc.spec.a });
    }
    // a fixed domain never spreads; only the vanishing label is meaningful there
    let indeterminate = sc.spec.mu > 0.0 && outcome.any_indeterminate();
    write_outputs(dir, &traj, &summary, with_svg)?;
    Ok(SimReport {
        dir: dir.to_path_buf(),
        indeterminate,
        summary,
    })
}

/// Runs a named preset, coupled or single-species.
pub fn simulate_preset(
    name: &str,
    out: Option<&Path>,
    with_svg: bool,
) -> Result<SimReport, CliError> {
    let preset =
        presets::find(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
    match preset.scenario {
        Scenario::Coupled(_) => {
            let mut spec = config::from_preset(name)?;
            if let Some(o) = out {
                spec.outputs.dir = o.to_path_buf();
            }
            spec.outputs.svg = with_svg;
            simulate(&spec)
        }
        Scenario::Single(sc) => {
            simulate_single(name, &sc, out.unwrap_or(Path::new("out")), with_svg)
        }
    }
}

pub struct SemiwaveArgs {
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub tol: f64,
    pub y_max: Option<f64>,
}

/// Solves the semi-wave problem; writes `semiwave.csv` when `out` is given.
pub fn semiwave(args: &SemiwaveArgs, out: Option<&Path>) -> Result<SemiWave, CliError> {
    let p = SemiWaveParams::new(args.mu, args.a, args.b, args.d)?;
    let w = semiwave::solve_semiwave(
        &p,
        args.tol,
        args.y_max.unwrap_or_else(|| p.default_y_max()),
    )?;
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let mut text = String::from("y,q\n");
        for (y, q) in w.y_grid.iter().zip(&w.q) {
            text.push_str(&format!("{y:.16e},{q:.16e}\n"));
        }
        write_file(&dir.join("semiwave.csv"), text)?;
    }
    Ok(w)
}

pub fn verify(suite: &str) -> Result<Vec<CriterionResult>, CliError> {
    verify::run_suite(suite).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown suite `{suite}` (expected one of {})",
            verify::SUITES.join(", ")
        ))
    })
}

pub fn presets_listing() -> String {
    let mut s = String::new();
    for p in presets::all() {
        let kind = match p.scenario {
            Scenario::Coupled(_) => "two-species",
            Scenario::Single(_) => "single-species",
        };
        s.push_str(&format!("{:<20} {:<15} {}\n", p.name, kind, p.summary));
    }
    s
}

/// Full JSON description of a preset.
pub fn preset_json(name: &str) -> Result<String, CliError> {
    let preset =
        presets::find(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
    Ok(match preset.scenario {
        Scenario::Coupled(_) => config::echo(&config::from_preset(name)?),
        Scenario::Single(sc) => serde_json::to_string_pretty(&sc).expect("json"),
    })
}

pub fn label_name(l: Label) -> &'static str {
    match l {
        Label::Spreading => "Spreading",
        Label::Vanishing => "Vanishing",
        Label::Indeterminate => "Indeterminate",
    }
}
