//! Phase diagrams over one or two parameters.

use std::path::Path;

use rayon::prelude::*;
use twofront_core::{classify, run, thresholds, ClassifyCriteria, Label, Params};

use crate::commands::{label_name, write_file};
use crate::config::RunSpec;
use crate::svg;
use crate::CliError;

pub const MAX_CELLS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

/// `NAME=v1,v2,...` with `NAME` a model parameter.
pub fn parse_axis(text: &str) -> Result<Axis, CliError> {
    let usage = |m: String| CliError::Usage(m);
    let (name, list) = text
        .split_once('=')
        .ok_or_else(|| usage(format!("axis `{text}` must look like NAME=v1,v2")))?;
    let name = name.trim();
    if !Params::FIELDS.contains(&name) {
        return Err(usage(format!(
            "axis `{name}` is not a parameter (one of {})",
            Params::FIELDS.join(", ")
        )));
    }
    let values = list
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("axis `{name}`: `{v}` is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(usage(format!("axis `{name}` has no values")));
    }
    Ok(Axis {
        name: name.to_string(),
        values,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: Vec<usize>,
    pub values: Vec<f64>,
    pub result: Result<CellResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub labels: [Label; 2],
    pub slopes: [Option<f64>; 2],
    pub fronts: [f64; 2],
}

fn run_cell(base: &RunSpec, axes: &[Axis], index: Vec<usize>) -> Cell {
    let values: Vec<f64> = axes.iter().zip(&index).map(|(a, &i)| a.values[i]).collect();
    let result = (|| {
        let mut params = base.params;
        for (a, &v) in axes.iter().zip(&values) {
            params.set(&a.name, v).map_err(|e| e.to_string())?;
        }
        params.validate().map_err(|e| e.to_string())?;
        let mut grid = base.grid;
        grid.validate(params.r1.max(params.r2))
            .map_err(|e| e.to_string())?;
        grid.fit_strides();
        let init = base.init.build();
        let traj = run(&params, &init, &grid).map_err(|e| e.to_string())?;
        let o = classify(&traj, &thresholds(&params), &ClassifyCriteria::default());
        let last = traj.last();
        Ok(CellResult {
            labels: [o.label(1), o.label(2)],
            slopes: [o.species[0].slope, o.species[1].slope],
            fronts: [last.s[0], last.s[1]],
        })
    })();
    Cell {
        index,
        values,
        result,
    }
}

/// All cells in row-major order (first axis slowest), independent of scheduling.
pub fn sweep(base: &RunSpec, axes: &[Axis]) -> Result<Vec<Cell>, CliError> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(CliError::Usage(format!(
            "need one or two axes, got {}",
            axes.len()
        )));
    }
    if axes.len() == 2 && axes[0].name == axes[1].name {
        return Err(CliError::Usage(format!(
            "axis `{}` given twice",
            axes[0].name
        )));
    }
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    if total > MAX_CELLS {
        return Err(CliError::Usage(format!(
            "{total} cells exceed the limit of {MAX_CELLS}"
        )));
    }
    let indices: Vec<Vec<usize>> = (0..total)
        .map(|k| {
            if axes.len() == 1 {
                vec![k]
            } else {
                let m = axes[1].values.len();
                vec![k / m, k % m]
            }
        })
        .collect();
    Ok(indices
        .into_par_iter()
        .map(|ix| run_cell(base, axes, ix))
        .collect())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v:.16e}"))
}

pub fn phase_csv(axes: &[Axis], cells: &[Cell]) -> String {
    let mut head = vec!["cell".to_string()];
    head.extend(axes.iter().map(|a| a.name.clone()));
    head.extend(
        [
            "status", "label1", "label2", "slope1", "slope2", "s1_final", "s2_final", "error",
        ]
        .map(String::from),
    );
    let mut out = head.join(",");
    out.push('\n');
    for (k, c) in cells.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(c.values.iter().map(|v| format!("{v}")));
        match &c.result {
            Ok(r) => row.extend([
                "ok".to_string(),
                label_name(r.labels[0]).into(),
                label_name(r.labels[1]).into(),
                opt(r.slopes[0]),
                opt(r.slopes[1]),
                format!("{:.16e}", r.fronts[0]),
                format!("{:.16e}", r.fronts[1]),
                String::new(),
            ]),
            Err(e) => {
                row.extend([
                    "error".to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
                row.push(csv_field(e));
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

const LEGEND: [(&str, &str); 6] = [
    ("both spread", "#2ca02c"),
    ("only u spreads", "#1f77b4"),
    ("only v spreads", "#d62728"),
    ("both vanish", "#7f7f7f"),
    ("undecided", "#ffbf00"),
    ("error", "#000000"),
];

fn legend_index(cell: &Cell) -> usize {
    use Label::*;
    match &cell.result {
        Err(_) => 5,
        Ok(r) => match r.labels {
            [Spreading, Spreading] => 0,
            [Spreading, Vanishing] => 1,
            [Vanishing, Spreading] => 2,
            [Vanishing, Vanishing] => 3,
            [Indeterminate, _] | [_, Indeterminate] => 4,
        },
    }
}

pub fn phase_svg(axes: &[Axis], cells: &[Cell]) -> String {
    let ticks = |a: &Axis| a.values.iter().map(|v| format!("{v}")).collect::<Vec<_>>();
    let (x_axis, y_axis) = match axes {
        [a] => (a, None),
        [a, b] => (b, Some(a)),
        _ => unreachable!("sweep validates the axis count"),
    };
    let cols = x_axis.values.len();
    let grid: Vec<Vec<usize>> = cells
        .chunks(cols)
        .map(|row| row.iter().map(legend_index).collect())
        .collect();
    svg::heat_map(
        "Phase diagram",
        &x_axis.name,
        &ticks(x_axis),
        y_axis.map_or("", |a| a.name.as_str()),
        &y_axis.map(ticks).unwrap_or_default(),
        &grid,
        &LEGEND,
    )
}

pub fn write_sweep(
    dir: &Path,
    axes: &[Axis],
    cells: &[Cell],
    with_svg: bool,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write_file(&dir.join("phase.csv"), phase_csv(axes, cells))?;
    if with_svg {
        write_file(&dir.join("phase.svg"), phase_svg(axes, cells))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a = parse_axis("mu1=0.5, 1,2").unwrap();
        assert_eq!(
            a,
            Axis {
                name: "mu1".into(),
                values: vec![0.5, 1.0, 2.0]
            }
        );
        assert!(parse_axis("zeta=1").is_err());
        assert!(parse_axis("k").is_err());
        assert!(parse_axis("k=1,x").is_err());
    }

    #[test]
    fn error_fields_are_quoted() {
        assert_eq!(csv_field("a, \"b\""), "\"a, \"\"b\"\"\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
