use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twofront_cli::commands::{self, SemiwaveArgs};
use twofront_cli::config::{self, RunSpec};
use twofront_cli::sweep::{self, Axis};
use twofront_cli::{CliError, EXIT_INDETERMINATE, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};

#[derive(Parser)]
#[command(
    name = "twofront",
    version,
    about = "Two-species competition with free boundaries"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one simulation and write CSV, JSON and SVG outputs.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with status 3 if any species is left undecided.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        no_svg: bool,
    },
    /// Semi-wave speed c(mu, a, b, d).
    Semiwave {
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        y_max: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase diagram over one or two parameters.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// NAME=v1,v2,... (repeat for a second axis)
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_svg: bool,
    },
    /// Run acceptance suites.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
    /// List presets, or print one as JSON.
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
}

fn load_spec(config: Option<&PathBuf>, preset: Option<&str>) -> Result<RunSpec, CliError> {
    match (config, preset) {
        (Some(path), preset) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let mut doc: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| config::ConfigError::Syntax(e.to_string()))?;
            if let (Some(p), Some(obj)) = (preset, doc.as_object_mut()) {
                obj.insert("preset".into(), p.into());
            }
            Ok(config::parse_value(&doc)?)
        }
        (None, Some(p)) => Ok(config::from_preset(p)?),
        (None, None) => Err(CliError::Usage("need --config or --preset".into())),
    }
}

fn dispatch(cmd: Cmd) -> Result<u8, CliError> {
    match cmd {
        Cmd::Simulate {
            config,
            preset,
            out,
            strict,
            no_svg,
        } => {
            let report = match (&config, &preset) {
                (None, Some(name)) => commands::simulate_preset(name, out.as_deref(), !no_svg)?,
                _ => {
                    let mut spec = load_spec(config.as_ref(), preset.as_deref())?;
                    if let Some(o) = out {
                        spec.outputs.dir = o;
                    }
                    if no_svg {
                        spec.outputs.svg = false;
                    }
                    commands::simulate(&spec)?
                }
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&report.summary["outcome"]).expect("json")
            );
            println!("outputs written to {}", report.dir.display());
            Ok(if strict && report.indeterminate {
                EXIT_INDETERMINATE
            } else {
                EXIT_OK
            })
        }
        Cmd::Semiwave {
            mu,
            a,
            b,
            d,
            tol,
            y_max,
            out,
        } => {
            let w = commands::semiwave(
                &SemiwaveArgs {
                    mu,
                    a,
                    b,
                    d,
                    tol,
                    y_max,
                },
                out.as_deref(),
            )?;
            println!("c = {:.12}", w.c);
            println!(
                "bracket = [{:.12}, {:.12}], bisections = {}, residual = {:.3e}",
                w.bracket.0, w.bracket.1, w.bisections, w.residual
            );
            Ok(EXIT_OK)
        }
        Cmd::Sweep {
            config,
            preset,
            axes,
            out,
            no_svg,
        } => {
            let mut spec = load_spec(config.as_ref(), preset.as_deref())?;
            if let Some(o) = out {
                spec.outputs.dir = o;
            }
            let axes: Vec<Axis> = axes
                .iter()
                .map(|a| sweep::parse_axis(a))
                .collect::<Result<_, _>>()?;
            let cells = sweep::sweep(&spec, &axes)?;
            sweep::write_sweep(
                &spec.outputs.dir,
                &axes,
                &cells,
                spec.outputs.svg && !no_svg,
            )?;
            let failed = cells.iter().filter(|c| c.result.is_err()).count();
            println!(
                "{} cells ({failed} failed), written to {}",
                cells.len(),
                spec.outputs.dir.display()
            );
            Ok(EXIT_OK)
        }
        Cmd::Verify { suite } => {
            let results = commands::verify(&suite)?;
            for r in &results {
                println!("{r}");
            }
            println!();
            println!("{:<6} {:<6} {:>9}  title", "id", "result", "seconds");
            for r in &results {
                println!(
                    "{:<6} {:<6} {:>9.2}  {}",
                    r.id,
                    if r.passed { "pass" } else { "FAIL" },
                    r.elapsed_s,
                    r.title
                );
            }
            Ok(if results.iter().all(|r| r.passed) {
                EXIT_OK
            } else {
                EXIT_VERIFY
            })
        }
        Cmd::Presets { show } => {
            match show {
                Some(name) => println!("{}", commands::preset_json(&name)?),
                None => print!("{}", commands::presets_listing()),
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
