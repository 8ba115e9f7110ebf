//! Minimal SVG emitters: line plots and a label heat map.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD_L: f64 = 64.0;
const PAD_R: f64 = 120.0;
const PAD_T: f64 = 32.0;
const PAD_B: f64 = 48.0;

pub const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series<'a> {
    pub name: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1) = range(series.iter().flat_map(|s| s.x.iter().copied()));
    let (y0, y1) = range(series.iter().flat_map(|s| s.y.iter().copied()));
    let pw = W - PAD_L - PAD_R;
    let ph = H - PAD_T - PAD_B;
    let sx = |x: f64| PAD_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| PAD_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(
        out,
        r#"<rect x="{PAD_L}" y="{PAD_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xv:.3}</text>"#,
            sx(xv),
            H - PAD_B + 16.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.3}</text>"#,
            PAD_L - 4.0,
            sy(yv) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        PAD_L + pw / 2.0,
        H - 8.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        PAD_T + ph / 2.0,
        PAD_T + ph / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::new();
        for (&x, &y) in s.x.iter().zip(s.y) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
            }
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.trim_end()
        );
        let ly = PAD_T + 16.0 + 18.0 * i as f64;
        let lx = W - PAD_R + 10.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One coloured cell per `(row, col)`; `cells[r][c]` indexes `legend`.
pub fn heat_map(
    title: &str,
    x_label: &str,
    x_ticks: &[String],
    y_label: &str,
    y_ticks: &[String],
    cells: &[Vec<usize>],
    legend: &[(&str, &str)],
) -> String {
    let rows = cells.len().max(1);
    let cols = cells.first().map_or(1, |r| r.len().max(1));
    let pw = W - PAD_L - PAD_R;
    let ph = H - PAD_T - PAD_B;
    let (cw, ch) = (pw / cols as f64, ph / rows as f64);

    let mut out = String::new();
    header(&mut out, title);
    for (r, row) in cells.iter().enumerate() {
        for (c, &k) in row.iter().enumerate() {
            let color = legend.get(k).map_or("#cccccc", |l| l.1);
            // first row at the bottom
            let y = PAD_T + (rows - 1 - r) as f64 * ch;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" stroke="white"/>"#,
                PAD_L + c as f64 * cw,
                y,
                cw,
                ch
            );
        }
    }
    for (c, t) in x_ticks.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            PAD_L + (c as f64 + 0.5) * cw,
            H - PAD_B + 16.0,
            escape(t)
        );
    }
    for (r, t) in y_ticks.iter().enumerate() {
        let y = PAD_T + (rows - 1 - r) as f64 * ch + ch / 2.0 + 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{}</text>"#,
            PAD_L - 4.0,
            escape(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        PAD_L + pw / 2.0,
        H - 8.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        PAD_T + ph / 2.0,
        PAD_T + ph / 2.0,
        escape(y_label)
    );
    for (i, (name, color)) in legend.iter().enumerate() {
        let ly = PAD_T + 10.0 + 18.0 * i as f64;
        let lx = W - PAD_R + 10.0;
        let _ = writeln!(
            out,
            r#"<rect x="{lx}" y="{}" width="12" height="12" fill="{color}"/>"#,
            ly - 10.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}">{}</text>"#,
            lx + 18.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_is_well_formed() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 3.0, f64::NAN];
        let s = line_plot(
            "a < b",
            "t",
            "s",
            &[Series {
                name: "s1",
                x: &x,
                y: &y,
            }],
        );
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a &lt; b"));
        assert_eq!(s.matches("<polyline").count(), 1);
        assert!(!s.contains("NaN"));
    }

    #[test]
    fn flat_series_does_not_divide_by_zero() {
        let x = [0.0, 1.0];
        let y = [2.0, 2.0];
        let s = line_plot(
            "",
            "",
            "",
            &[Series {
                name: "c",
                x: &x,
                y: &y,
            }],
        );
        assert!(!s.contains("inf") && !s.contains("NaN"));
    }

    #[test]
    fn heat_map_cells() {
        let cells = vec![vec![0, 1], vec![1, 2]];
        let s = heat_map(
            "m",
            "x",
            &["a".into(), "b".into()],
            "y",
            &["c".into(), "d".into()],
            &cells,
            &[("p", "#000"), ("q", "#111"), ("r", "#222")],
        );
        assert_eq!(s.matches("<rect").count(), 1 + 4 + 3);
    }
}
