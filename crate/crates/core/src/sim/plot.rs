//! SVG charts from run and sweep CSV outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::coord::Mode;

use super::output::{read_entropy_csv, read_modes_csv, read_series_csv, read_summary_csv, read_targets_csv, SeriesRow};
use super::SimError;

const SIZE: (u32, u32) = (900, 540);
const PALETTE: [RGBColor; 8] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(255, 127, 14),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
    RGBColor(227, 119, 194),
    RGBColor(127, 127, 127),
];

fn plot_err<E: std::fmt::Display>(e: E) -> SimError {
    SimError::Plot(e.to_string())
}

fn mode_color(m: Mode) -> RGBColor {
    match m {
        Mode::Exploit => RGBColor(0, 0, 0),
        Mode::CheckIn => RGBColor(31, 119, 180),
        Mode::Explore => RGBColor(214, 39, 40),
    }
}

/// Axis range with a little headroom; degenerate ranges are widened.
fn range(lo: f64, hi: f64) -> std::ops::Range<f64> {
    if !lo.is_finite() || !hi.is_finite() {
        return 0.0..1.0;
    }
    if hi - lo < 1e-9 {
        return (lo - 1.0)..(hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad)..(hi + pad)
}

fn bounds<'a>(it: impl Iterator<Item = &'a (f64, f64)>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| (lo.min(y), hi.max(y)))
}

/// Lines (optionally with ±1σ bands) of `(x, mean, std)` series.
fn line_chart(
    path: &Path,
    title: &str,
    x_desc: &str,
    y_desc: &str,
    series: &[(String, Vec<(f64, f64, f64)>)],
) -> Result<(), SimError> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, s)| s.iter().flat_map(|&(x, m, sd)| [(x, m - sd), (x, m + sd)]))
        .collect();
    let (xlo, xhi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));
    let (ylo, yhi) = bounds(pts.iter());
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(range(xlo, xhi), range(ylo, yhi))
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc(x_desc).y_desc(y_desc).draw().map_err(plot_err)?;
    for (i, (label, s)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.iter().any(|p| p.2 > 0.0) {
            let mut band: Vec<(f64, f64)> = s.iter().map(|&(x, m, sd)| (x, m + sd)).collect();
            band.extend(s.iter().rev().map(|&(x, m, sd)| (x, m - sd)));
            chart.draw_series(std::iter::once(Polygon::new(band, color.mix(0.2).filled()))).map_err(plot_err)?;
        }
        chart
            .draw_series(LineSeries::new(s.iter().map(|&(x, m, _)| (x, m)), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(label.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    if !series.is_empty() {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.85))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
    }
    root.present().map_err(plot_err)?;
    Ok(())
}

fn mode_timeline(path: &Path, rows: &[(usize, usize, Mode)]) -> Result<(), SimError> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let steps = rows.iter().map(|r| r.0).max().unwrap_or(1).max(1);
    let robots = rows.iter().map(|r| r.1 + 1).max().unwrap_or(1).max(1);
    let mut chart = ChartBuilder::on(&root)
        .caption("Control mode per robot (black exploit, blue check-in, red explore)", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..steps as f64, 0.0..robots as f64)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("step").y_desc("robot").disable_y_mesh().draw().map_err(plot_err)?;
    chart
        .draw_series(rows.iter().map(|&(t, r, m)| {
            Rectangle::new(
                [((t - 1) as f64, r as f64 + 0.1), (t as f64, r as f64 + 0.9)],
                mode_color(m).filled(),
            )
        }))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Stacked fraction bars (explore, check-in, exploit) per sweep value.
fn mode_bars(path: &Path, axis: &str, bars: &[(String, [f64; 3])]) -> Result<(), SimError> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let n = bars.len().max(1);
    let mut chart = ChartBuilder::on(&root)
        .caption("Fraction of time per mode (black exploit, blue check-in, red explore)", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..n as f64, 0.0..1.0)
        .map_err(plot_err)?;
    let labels: Vec<String> = bars.iter().map(|b| b.0.clone()).collect();
    chart
        .configure_mesh()
        .x_desc(axis)
        .y_desc("fraction")
        .x_labels(n)
        .x_label_formatter(&|x| labels.get(x.floor() as usize).cloned().unwrap_or_default())
        .draw()
        .map_err(plot_err)?;
    let order = [Mode::Explore, Mode::CheckIn, Mode::Exploit];
    for (i, (_, f)) in bars.iter().enumerate() {
        let mut base = 0.0;
        for (k, m) in order.iter().enumerate() {
            let top = base + f[k];
            chart
                .draw_series(std::iter::once(Rectangle::new(
                    [(i as f64 + 0.15, base), (i as f64 + 0.85, top)],
                    mode_color(*m).filled(),
                )))
                .map_err(plot_err)?;
            base = top;
        }
    }
    root.present().map_err(plot_err)?;
    Ok(())
}

fn group_series(rows: &[SeriesRow]) -> Vec<(String, Vec<&SeriesRow>)> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<&SeriesRow>> = BTreeMap::new();
    for r in rows {
        if !groups.contains_key(&r.value) {
            order.push(r.value.clone());
        }
        groups.entry(r.value.clone()).or_default().push(r);
    }
    order.into_iter().map(|v| (v.clone(), groups.remove(&v).unwrap_or_default())).collect()
}

/// Renders every chart the CSV files in `dir` support; returns the SVG paths written.
pub fn render_plots(dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    let mut written = Vec::new();
    let file = |name: &str| dir.join(name);

    if file("entropy.csv").exists() {
        let rows = read_entropy_csv(&file("entropy.csv"))?;
        let s = vec![("server".to_string(), rows.iter().map(|&(t, h)| (t as f64, h, 0.0)).collect())];
        line_chart(&file("entropy.svg"), "Entropy of the server PHD", "step", "entropy (nats)", &s)?;
        written.push(file("entropy.svg"));
    }
    if file("modes.csv").exists() {
        let rows = read_modes_csv(&file("modes.csv"))?;
        mode_timeline(&file("modes.svg"), &rows)?;
        written.push(file("modes.svg"));
    }
    if file("targets.csv").exists() {
        let rows = read_targets_csv(&file("targets.csv"))?;
        let s = vec![
            ("true".to_string(), rows.iter().map(|&(t, n, _)| (t as f64, n as f64, 0.0)).collect()),
            ("false".to_string(), rows.iter().map(|&(t, _, n)| (t as f64, n as f64, 0.0)).collect()),
        ];
        line_chart(&file("targets.svg"), "Extracted targets", "step", "count", &s)?;
        written.push(file("targets.svg"));
    }
    if file("series.csv").exists() {
        let rows = read_series_csv(&file("series.csv"))?;
        let groups = group_series(&rows);
        let entropy: Vec<_> = groups
            .iter()
            .map(|(v, g)| (v.clone(), g.iter().map(|r| (r.step as f64, r.entropy.0, r.entropy.1)).collect()))
            .collect();
        line_chart(&file("entropy.svg"), "Mean entropy of the server PHD (±1σ)", "step", "entropy (nats)", &entropy)?;
        written.push(file("entropy.svg"));
        let mut targets = Vec::new();
        for (v, g) in &groups {
            targets.push((
                format!("{v} true"),
                g.iter().map(|r| (r.step as f64, r.true_targets.0, r.true_targets.1)).collect(),
            ));
            targets.push((
                format!("{v} false"),
                g.iter().map(|r| (r.step as f64, r.false_targets.0, r.false_targets.1)).collect(),
            ));
        }
        line_chart(&file("targets.svg"), "Mean extracted targets (±1σ)", "step", "count", &targets)?;
        written.push(file("targets.svg"));
    }
    if file("summary.csv").exists() {
        let rows = read_summary_csv(&file("summary.csv"))?;
        let axis = rows.first().map(|r| r.axis.clone()).unwrap_or_default();
        let bars: Vec<(String, [f64; 3])> =
            rows.iter().map(|r| (r.value.clone(), [r.explore.0, r.checkin.0, r.exploit.0])).collect();
        mode_bars(&file("modes.svg"), &axis, &bars)?;
        written.push(file("modes.svg"));
    }
    if written.is_empty() {
        return Err(SimError::Io(format!("{}: no run or sweep CSV files found", dir.display())));
    }
    written.dedup();
    Ok(written)
}
