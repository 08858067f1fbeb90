//! Convergence-curve SVG rendering, no plotting dependency.
//!
//! Curves are emitted as polylines in *data coordinates* inside a group
//! that carries the affine data-to-screen transform; the numbers in each
//! `points` attribute are therefore the iteration indices and the median
//! best-so-far values themselves.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use hasso_core::tuner::PolicyKind;

use crate::experiment::{ConvergenceTable, PolicySeries};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 64.0;

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s.is_empty() || s == "-" {
            "0".to_string()
        } else {
            s.to_string()
        }
    }
}

/// Write one SVG: a median polyline and a shaded interquartile band per
/// series, with axes, tick labels, and a legend.
pub fn render_convergence(table: &ConvergenceTable, path: &Path) -> Result<()> {
    if table.series.is_empty() {
        bail!("nothing to plot: the table has no series");
    }
    let t_max = table
        .series
        .iter()
        .map(|s| s.median.len())
        .max()
        .unwrap_or(0);
    if t_max == 0 {
        bail!("nothing to plot: the series are empty");
    }

    let x_min = 1.0;
    let x_max = (t_max as f64).max(x_min + 1.0);
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &table.series {
        for v in s.median.iter().chain(&s.q25).chain(&s.q75) {
            y_min = y_min.min(*v);
            y_max = y_max.max(*v);
        }
    }
    let pad = 0.05 * (y_max - y_min).max(1e-12);
    let (y_min, y_max) = (y_min - pad, y_max + pad);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = plot_w / (x_max - x_min);
    let sy = -plot_h / (y_max - y_min);
    let tx = MARGIN_LEFT - sx * x_min;
    let ty = MARGIN_TOP - sy * y_max;
    let to_screen_x = |x: f64| tx + sx * x;
    let to_screen_y = |y: f64| ty + sy * y;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(&table.title)
    ));

    // Axes and ticks in screen coordinates.
    let axis_y = HEIGHT - MARGIN_BOTTOM;
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{axis_y}\" x2=\"{}\" y2=\"{axis_y}\" stroke=\"black\"/>\n",
        WIDTH - MARGIN_RIGHT
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{axis_y}\" stroke=\"black\"/>\n"
    ));
    for i in 0..=4 {
        let x = x_min + (x_max - x_min) * i as f64 / 4.0;
        let sxp = to_screen_x(x);
        svg.push_str(&format!(
            "  <line x1=\"{sxp}\" y1=\"{axis_y}\" x2=\"{sxp}\" y2=\"{}\" stroke=\"black\"/>\n",
            axis_y + 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{sxp}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            axis_y + 20.0,
            fmt_tick(x.round())
        ));
        let y = y_min + (y_max - y_min) * i as f64 / 4.0;
        let syp = to_screen_y(y);
        svg.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{syp}\" x2=\"{MARGIN_LEFT}\" y2=\"{syp}\" stroke=\"black\"/>\n",
            MARGIN_LEFT - 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 9.0,
            syp + 4.0,
            fmt_tick(y)
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">iteration</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 18.0
    ));
    svg.push_str(&format!(
        "  <text x=\"22\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 22 {})\">best value</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    // Data-coordinate group: polyline vertices are (iteration, value).
    svg.push_str(&format!(
        "  <g transform=\"translate({tx},{ty}) scale({sx},{sy})\">\n"
    ));
    for (i, s) in table.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.q25.len() == s.median.len() && !s.q25.is_empty() {
            let mut band = String::new();
            for (t, v) in s.q75.iter().enumerate() {
                band.push_str(&format!("{},{} ", t + 1, v));
            }
            for (t, v) in s.q25.iter().enumerate().rev() {
                band.push_str(&format!("{},{} ", t + 1, v));
            }
            svg.push_str(&format!(
                "    <polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n",
                band.trim_end()
            ));
        }
        let mut pts = String::new();
        for (t, v) in s.median.iter().enumerate() {
            pts.push_str(&format!("{},{} ", t + 1, v));
        }
        svg.push_str(&format!(
            "    <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" vector-effect=\"non-scaling-stroke\"/>\n",
            pts.trim_end()
        ));
    }
    svg.push_str("  </g>\n");

    // Legend, top right.
    for (i, s) in table.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let ly = MARGIN_TOP + 16.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT - 170.0;
        svg.push_str(&format!(
            "  <line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            lx + 24.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            lx + 30.0,
            ly + 4.0,
            escape(&s.label)
        ));
    }
    svg.push_str("</svg>\n");

    fs::File::create(path)
        .and_then(|mut f| f.write_all(svg.as_bytes()))
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Rebuild a plot table from the `*-summary.csv` files in a directory.
pub fn read_summaries(dir: &Path) -> Result<ConvergenceTable> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with("-summary.csv"))
        })
        .collect();
    entries.sort();
    if entries.is_empty() {
        bail!("no *-summary.csv files in {}", dir.display());
    }

    let mut series = Vec::new();
    let mut budget = 0;
    for path in &entries {
        let stem = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap()
            .trim_end_matches("-summary.csv")
            .to_string();
        let text = fs::read_to_string(path)?;
        let mut median = Vec::new();
        let mut q25 = Vec::new();
        let mut q75 = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line != "iteration,median,q25,q75" {
                    bail!("{}: unexpected header `{line}`", path.display());
                }
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                bail!("{}: malformed row `{line}`", path.display());
            }
            median.push(cols[1].parse::<f64>().map_err(|e| anyhow!("{e}"))?);
            q25.push(cols[2].parse::<f64>().map_err(|e| anyhow!("{e}"))?);
            q75.push(cols[3].parse::<f64>().map_err(|e| anyhow!("{e}"))?);
        }
        budget = budget.max(median.len());
        // Longest policy suffix wins, so `hasso-rand` is not read as `rand`.
        let policy = PolicyKind::ALL
            .iter()
            .filter(|k| stem.ends_with(k.as_str()))
            .max_by_key(|k| k.as_str().len())
            .copied()
            .unwrap_or(PolicyKind::Fixed);
        series.push(PolicySeries {
            label: stem,
            policy,
            best_rows: Vec::new(),
            median,
            q25,
            q75,
            total_ms: Vec::new(),
            mean_step_ms: Vec::new(),
        });
    }
    Ok(ConvergenceTable {
        title: dir
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("convergence")
            .to_string(),
        budget,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_formatting_is_compact() {
        assert_eq!(fmt_tick(0.0), "0");
        assert_eq!(fmt_tick(150.0), "150");
        assert_eq!(fmt_tick(0.25), "0.25");
        assert_eq!(fmt_tick(1.25e7), "1.25e7");
    }
}
