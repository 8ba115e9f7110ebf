//! JSON run configuration.
//!
//! ```json
//! {"params": {"d1": 1, "d2": 1, "r1": 1, "r2": 1, "k": 0.5, "h": 0.5, "mu1": 1, "mu2": 1},
//!  "init": {"family": "cosine", "s1_0": 2, "s2_0": 2},
//!  "grid": {"n_xi": 256, "dt": 0.001, "t_end": 50},
//!  "outputs": {"dir": "out", "svg": true}}
//! ```
//!
//! With `"preset": NAME` every section becomes optional and missing keys are
//! taken from the preset.

use std::path::PathBuf;

use serde_json::{json, Map, Value};
use thiserror::Error;
use twofront_core::fbsolver::{GridSpec, SampledProfile};
use twofront_core::presets::{self, Family, InitSpec, Scenario};
use twofront_core::Params;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed JSON: {0}")]
    Syntax(String),
    #[error("schema error at `{path}`: {reason}")]
    Schema { path: String, reason: String },
    #[error("invalid value at `{path}`: {reason}")]
    Value { path: String, reason: String },
}

impl ConfigError {
    pub fn path(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax(_) => None,
            ConfigError::Schema { path, .. } | ConfigError::Value { path, .. } => Some(path),
        }
    }
}

fn schema(path: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Schema {
        path: path.into(),
        reason: reason.into(),
    }
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        path: path.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub dir: PathBuf,
    pub svg: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            dir: PathBuf::from("out"),
            svg: true,
        }
    }
}

/// A fully validated two-species run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub params: Params,
    pub init: InitSpec,
    pub grid: GridSpec,
    pub outputs: Outputs,
    pub preset: Option<String>,
}

pub fn default_dt(params: &Params) -> f64 {
    GridSpec::with_defaults(1.0, params.r1.max(params.r2)).dt
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, ConfigError> {
    v.as_object()
        .ok_or_else(|| schema(path, "expected an object"))
}

fn check_keys(obj: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<(), ConfigError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(join(path, k), "unknown key")),
        None => Ok(()),
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn number(obj: &Map<String, Value>, path: &str, key: &str) -> Result<Option<f64>, ConfigError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| schema(join(path, key), "expected a number")),
    }
}

fn required(
    obj: &Map<String, Value>,
    path: &str,
    key: &str,
    base: Option<f64>,
) -> Result<f64, ConfigError> {
    number(obj, path, key)?
        .or(base)
        .ok_or_else(|| schema(join(path, key), "missing"))
}

fn count(obj: &Map<String, Value>, path: &str, key: &str) -> Result<Option<usize>, ConfigError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|n| Some(n as usize))
            .ok_or_else(|| schema(join(path, key), "expected a non-negative integer")),
    }
}

fn table(v: &Value, path: &str) -> Result<SampledProfile, ConfigError> {
    let obj = object(v, path)?;
    check_keys(obj, path, &["x", "values"])?;
    let list = |key: &str| -> Result<Vec<f64>, ConfigError> {
        let p = join(path, key);
        let arr = obj.get(key).ok_or_else(|| schema(&p, "missing"))?;
        let arr = arr
            .as_array()
            .ok_or_else(|| schema(&p, "expected an array of numbers"))?;
        arr.iter()
            .enumerate()
            .map(|(i, x)| {
                x.as_f64()
                    .ok_or_else(|| schema(format!("{p}[{i}]"), "expected a number"))
            })
            .collect()
    };
    Ok(SampledProfile {
        x: list("x")?,
        values: list("values")?,
    })
}

/// Base values for a configuration that names a preset.
fn preset_base(name: &str) -> Result<presets::Coupled, ConfigError> {
    match presets::find(name) {
        Some(p) => match p.scenario {
            Scenario::Coupled(c) => Ok(c),
            Scenario::Single(_) => Err(invalid(
                "preset",
                format!("`{name}` is a single-species preset; run it with --preset"),
            )),
        },
        None => Err(invalid("preset", format!("unknown preset `{name}`"))),
    }
}

pub fn parse_config(text: &str) -> Result<RunSpec, ConfigError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    parse_value(&root)
}

pub fn parse_value(root: &Value) -> Result<RunSpec, ConfigError> {
    let top = object(root, "")?;
    check_keys(top, "", &["params", "init", "grid", "outputs", "preset"])?;
    let preset = match top.get("preset") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(schema("preset", "expected a string")),
    };
    let base = preset.as_deref().map(preset_base).transpose()?;
    let empty = Value::Object(Map::new());
    let section = |key: &str| -> Result<&Map<String, Value>, ConfigError> {
        match top.get(key) {
            Some(v) => object(v, key),
            None if base.is_some() || key == "outputs" => object(&empty, key),
            None => Err(schema(key, "missing")),
        }
    };

    let p = section("params")?;
    check_keys(p, "params", &Params::FIELDS)?;
    let mut params = base.as_ref().map(|b| b.params).unwrap_or_default();
    for name in Params::FIELDS {
        let v = required(
            p,
            "params",
            name,
            base.as_ref()
                .map(|b| b.params.get(name).expect("known field")),
        )?;
        params.set(name, v).expect("known field");
    }
    params
        .validate()
        .map_err(|e| invalid(join("params", &e.field), e.reason))?;

    let init = parse_init(section("init")?, base.as_ref().map(|b| &b.init))?;
    init.build()
        .validate()
        .map_err(|e| invalid("init", e.to_string()))?;

    let g = section("grid")?;
    check_keys(
        g,
        "grid",
        &["n_xi", "dt", "t_end", "snapshot_stride", "profile_stride"],
    )?;
    let bg = base.as_ref().map(|b| b.grid);
    let mut grid = GridSpec {
        n_xi: count(g, "grid", "n_xi")?
            .or(bg.map(|b| b.n_xi))
            .unwrap_or(GridSpec::DEFAULT_N_XI),
        dt: number(g, "grid", "dt")?
            .or(bg.map(|b| b.dt))
            .unwrap_or_else(|| default_dt(&params)),
        t_end: required(g, "grid", "t_end", bg.map(|b| b.t_end))?,
        snapshot_stride: 1,
        profile_stride: 1,
    };
    grid.fit_strides();
    if let Some(n) = count(g, "grid", "snapshot_stride")? {
        grid.snapshot_stride = n;
    }
    if let Some(n) = count(g, "grid", "profile_stride")? {
        grid.profile_stride = n;
    }
    grid.validate(params.r1.max(params.r2))
        .map_err(|e| invalid("grid", e.to_string()))?;

    let o = section("outputs")?;
    check_keys(o, "outputs", &["dir", "svg"])?;
    let mut outputs = Outputs::default();
    match o.get("dir") {
        None => {}
        Some(Value::String(s)) if !s.is_empty() => outputs.dir = PathBuf::from(s),
        Some(_) => return Err(schema("outputs.dir", "expected a non-empty string")),
    }
    match o.get("svg") {
        None => {}
        Some(Value::Bool(b)) => outputs.svg = *b,
        Some(_) => return Err(schema("outputs.svg", "expected a boolean")),
    }

    Ok(RunSpec {
        params,
        init,
        grid,
        outputs,
        preset,
    })
}

fn parse_init(obj: &Map<String, Value>, base: Option<&InitSpec>) -> Result<InitSpec, ConfigError> {
    check_keys(
        obj,
        "init",
        &["family", "s1_0", "s2_0", "u_amp", "v_amp", "u0", "v0"],
    )?;
    let family = match obj.get("family") {
        None => base.map(|b| b.family.clone()).unwrap_or(Family::Cosine),
        Some(Value::String(s)) => match s.as_str() {
            "cosine" => Family::Cosine,
            "bump" => Family::Bump,
            "custom-table" => {
                let get = |k: &str| {
                    obj.get(k).ok_or_else(|| {
                        schema(join("init", k), "missing (required by custom-table)")
                    })
                };
                Family::CustomTable {
                    u0: table(get("u0")?, "init.u0")?,
                    v0: table(get("v0")?, "init.v0")?,
                }
            }
            other => {
                return Err(invalid(
                    "init.family",
                    format!("`{other}` is not one of cosine, bump, custom-table"),
                ))
            }
        },
        Some(_) => return Err(schema("init.family", "expected a string")),
    };
    if !matches!(family, Family::CustomTable { .. }) {
        for k in ["u0", "v0"] {
            if obj.contains_key(k) {
                return Err(schema(
                    join("init", k),
                    "only allowed with family custom-table",
                ));
            }
        }
    }
    let init = InitSpec {
        family,
        s1_0: required(obj, "init", "s1_0", base.map(|b| b.s1_0))?,
        s2_0: required(obj, "init", "s2_0", base.map(|b| b.s2_0))?,
        u_amp: number(obj, "init", "u_amp")?
            .or(base.map(|b| b.u_amp))
            .unwrap_or(1.0),
        v_amp: number(obj, "init", "v_amp")?
            .or(base.map(|b| b.v_amp))
            .unwrap_or(1.0),
    };
    for (k, v) in [
        ("s1_0", init.s1_0),
        ("s2_0", init.s2_0),
        ("u_amp", init.u_amp),
        ("v_amp", init.v_amp),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(join("init", k), "must be > 0"));
        }
    }
    Ok(init)
}

/// Every field written out, defaults included.
pub fn echo_value(spec: &RunSpec) -> Value {
    let mut params = Map::new();
    for (k, v) in spec.params.named() {
        params.insert(k.into(), json!(v));
    }
    let mut init = json!({
        "s1_0": spec.init.s1_0,
        "s2_0": spec.init.s2_0,
        "u_amp": spec.init.u_amp,
        "v_amp": spec.init.v_amp,
    });
    let family = match &spec.init.family {
        Family::Cosine => "cosine",
        Family::Bump => "bump",
        Family::CustomTable { u0, v0 } => {
            init["u0"] = json!({"x": u0.x, "values": u0.values});
            init["v0"] = json!({"x": v0.x, "values": v0.values});
            "custom-table"
        }
    };
    init["family"] = json!(family);
    let mut out = json!({
        "params": params,
        "init": init,
        "grid": {
            "n_xi": spec.grid.n_xi,
            "dt": spec.grid.dt,
            "t_end": spec.grid.t_end,
            "snapshot_stride": spec.grid.snapshot_stride,
            "profile_stride": spec.grid.profile_stride,
        },
        "outputs": {"dir": spec.outputs.dir.to_string_lossy(), "svg": spec.outputs.svg},
    });
    if let Some(p) = &spec.preset {
        out["preset"] = json!(p);
    }
    out
}

pub fn echo(spec: &RunSpec) -> String {
    serde_json::to_string_pretty(&echo_value(spec)).expect("plain JSON values")
}

/// The preset's run with default outputs.
pub fn from_preset(name: &str) -> Result<RunSpec, ConfigError> {
    parse_value(&json!({ "preset": name }))
}
