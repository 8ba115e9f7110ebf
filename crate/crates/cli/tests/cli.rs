use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn twofront(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twofront"))
        .args(args)
        .output()
        .expect("spawn twofront")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&twofront(&["--help"])), 0);
    assert_eq!(code(&twofront(&["--version"])), 0);
}

#[test]
fn bad_arguments_exit_64() {
    assert_eq!(code(&twofront(&["--bogus"])), 64);
    assert_eq!(code(&twofront(&["simulate"])), 64);
    assert_eq!(
        code(&twofront(&["simulate", "--preset", "no-such-preset"])),
        64
    );
    let out = twofront(&["verify", "no-such-suite"]);
    assert_eq!(code(&out), 64);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn solver_failure_exits_2() {
    let tmp = TempDir::new().unwrap();
    let out = twofront(&[
        "simulate",
        "--preset",
        "blowup-injection",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("species 1"));
}

#[test]
fn strict_indeterminate_exits_3() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().to_str().unwrap();
    assert_eq!(
        code(&twofront(&[
            "simulate",
            "--preset",
            "short-indeterminate",
            "--out",
            dir
        ])),
        0
    );
    assert_eq!(
        code(&twofront(&[
            "simulate",
            "--preset",
            "short-indeterminate",
            "--out",
            dir,
            "--strict"
        ])),
        3
    );
}

#[test]
fn schema_errors_name_the_path() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        (
            r#"{"preset":"short-indeterminate","params":{"k":-0.1}}"#,
            "params.k",
        ),
        (
            r#"{"preset":"short-indeterminate","grid":{"n_xi":"many"}}"#,
            "grid.n_xi",
        ),
        (
            r#"{"preset":"short-indeterminate","params":{"zeta":1}}"#,
            "params.zeta",
        ),
        (r#"{"params":{"d1":1}}"#, "params.d2"),
    ];
    for (text, path) in cases {
        let cfg = write_config(tmp.path(), text);
        let out = twofront(&[
            "simulate",
            "--config",
            &cfg,
            "--out",
            tmp.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 64, "{text}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(path), "{text}: {err}");
    }
    let cfg = write_config(tmp.path(), "{ not json");
    assert_eq!(code(&twofront(&["simulate", "--config", &cfg])), 64);
}

#[test]
fn zero_duration_writes_one_snapshot() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"preset":"short-indeterminate","grid":{"t_end":0}}"#,
    );
    let out_dir = tmp.path().join("out");
    let out = twofront(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&out_dir, "trajectory.csv");
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("t,s1,s2,s1dot,s2dot,u0,v0,umax,vmax\n"));
    for f in [
        "profiles.csv",
        "outcome.json",
        "spec.json",
        "fronts.svg",
        "profiles.svg",
    ] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
}

#[test]
fn simulate_is_bit_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(
            code(&twofront(&[
                "simulate",
                "--preset",
                "short-indeterminate",
                "--out",
                d.to_str().unwrap()
            ])),
            0
        );
    }
    for f in ["trajectory.csv", "profiles.csv", "outcome.json"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
}

#[test]
fn spec_echo_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(
        code(&twofront(&[
            "simulate",
            "--preset",
            "short-indeterminate",
            "--out",
            a.to_str().unwrap()
        ])),
        0
    );
    let echoed = a.join("spec.json");
    assert_eq!(
        code(&twofront(&[
            "simulate",
            "--config",
            echoed.to_str().unwrap(),
            "--out",
            b.to_str().unwrap()
        ])),
        0
    );
    assert_eq!(read(&a, "trajectory.csv"), read(&b, "trajectory.csv"));
}

#[test]
fn sweep_grid_with_a_failing_cell() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = twofront(&[
        "sweep",
        "--preset",
        "short-indeterminate",
        "--axis",
        "k=0.1,0.3,0.5,0.7,0.9",
        "--axis",
        "h=0.1,0.3,0.5,0.7,-1",
        "--out",
        dir,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(tmp.path(), "phase.csv");
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 25);
    assert!(csv.starts_with("cell,k,h,status,"));
    for (i, row) in rows.iter().enumerate() {
        let failing = i % 5 == 4;
        assert_eq!(row.contains(",error,"), failing, "{row}");
        assert!(row.starts_with(&format!("{i},")));
    }
    assert!(tmp.path().join("phase.svg").exists());
}

#[test]
fn sweep_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let d = tmp.path().join(name);
        let args = [
            "sweep",
            "--preset",
            "short-indeterminate",
            "--axis",
            "mu1=0.5,1,2,4",
            "--axis",
            "k=0.2,0.6",
            "--out",
            d.to_str().unwrap(),
        ];
        assert_eq!(code(&twofront(&args)), 0);
        outputs.push(read(&d, "phase.csv"));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn single_cell_sweep_matches_simulate() {
    let tmp = TempDir::new().unwrap();
    let sim = tmp.path().join("sim");
    let sw = tmp.path().join("sw");
    assert_eq!(
        code(&twofront(&[
            "simulate",
            "--preset",
            "short-indeterminate",
            "--out",
            sim.to_str().unwrap()
        ])),
        0
    );
    assert_eq!(
        code(&twofront(&[
            "sweep",
            "--preset",
            "short-indeterminate",
            "--axis",
            "k=0.5",
            "--out",
            sw.to_str().unwrap()
        ])),
        0
    );
    let outcome: serde_json::Value = serde_json::from_str(&read(&sim, "outcome.json")).unwrap();
    let csv = read(&sw, "phase.csv");
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let species = &outcome["outcome"]["species"];
    assert_eq!(row[2], "ok");
    for i in 0..2 {
        assert_eq!(row[3 + i], species[i]["label"].as_str().unwrap());
        let front: f64 = row[7 + i].parse().unwrap();
        assert_eq!(front, species[i]["final_front"].as_f64().unwrap());
    }
}

#[test]
fn sweep_rejects_bad_axes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().to_str().unwrap();
    for axis in [
        vec!["--axis", "zeta=1"],
        vec!["--axis", "k=1", "--axis", "k=2"],
        vec!["--axis", "k=1", "--axis", "h=1", "--axis", "mu1=1"],
    ] {
        let mut args = vec!["sweep", "--preset", "short-indeterminate", "--out", dir];
        args.extend(axis);
        assert_eq!(code(&twofront(&args)), 64, "{args:?}");
    }
}

#[test]
fn semiwave_prints_speed_and_writes_profile() {
    let tmp = TempDir::new().unwrap();
    let out = twofront(&[
        "semiwave",
        "--mu",
        "1",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let c: f64 = stdout
        .lines()
        .next()
        .unwrap()
        .trim_start_matches("c = ")
        .parse()
        .unwrap();
    assert!((c - 0.364370723894588).abs() < 1e-7, "{c}");
    assert!(read(tmp.path(), "semiwave.csv").starts_with("y,q\n"));
    assert_eq!(code(&twofront(&["semiwave", "--mu=-1"])), 64);
    assert_eq!(
        code(&twofront(&["semiwave", "--mu", "1", "--tol", "0.5"])),
        64
    );
}

#[test]
fn presets_listing_and_show() {
    let out = twofront(&["presets"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "thm1-vanish",
        "thm3-coexist",
        "thm6-slow-strong",
        "prop21-persistence",
    ] {
        assert!(text.contains(name), "{name}");
    }
    let out = twofront(&["presets", "--show", "thm3-coexist"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["params"]["k"], 0.5);
    assert_eq!(code(&twofront(&["presets", "--show", "nope"])), 64);
}

#[test]
fn single_species_preset_runs() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("o");
    let out = twofront(&[
        "simulate",
        "--preset",
        "single-spreading",
        "--out",
        cfg.to_str().unwrap(),
        "--no-svg",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(read(&cfg, "trajectory.csv").starts_with("t,g,gdot,w0,wmax\n"));
    assert!(!cfg.join("fronts.svg").exists());
}

#[test]
fn verify_analytic_suite_passes() {
    let out = twofront(&["verify", "analytic"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("AC-8"));
}
