//! Self-contained SVG rendering of the harness's CSV tables.

use std::path::Path;

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csvio::Table;
use crate::error::{ExpError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlotSpec {
    /// One polyline per `y` column against column `x`.
    Line {
        x: String,
        y: Vec<String>,
        #[serde(default)]
        log_y: bool,
    },
    /// One shaded cell per row at `(x, y)`, gray level from `value` in
    /// `[0, 1]` (white = 1).
    Heatmap { x: String, y: String, value: String },
}

const SIZE: (u32, u32) = (640, 480);

fn plot_err(e: impl std::fmt::Display) -> ExpError {
    ExpError::Numerical(format!("plot rendering failed: {e}"))
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() || !hi.is_finite() {
        return None;
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

/// Renders `table` per `spec` into an SVG document.
pub fn render_svg(table: &Table, spec: &PlotSpec) -> Result<String> {
    let mut svg = String::new();
    match spec {
        PlotSpec::Line { x, y, log_y } => line(table, x, y, *log_y, &mut svg)?,
        PlotSpec::Heatmap { x, y, value } => heatmap(table, x, y, value, &mut svg)?,
    }
    Ok(svg)
}

pub fn render_file(csv: impl AsRef<Path>, spec: &PlotSpec, out: impl AsRef<Path>) -> Result<()> {
    let table = Table::read(csv)?;
    std::fs::write(out, render_svg(&table, spec)?)?;
    Ok(())
}

fn line(table: &Table, x: &str, ys: &[String], log_y: bool, svg: &mut String) -> Result<()> {
    if ys.is_empty() {
        return Err(ExpError::config("line plot needs at least one y column"));
    }
    let xs = table.column(x)?;
    let mut series = Vec::new();
    for name in ys {
        let col = table.column(name)?;
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(&col)
            .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
            .collect();
        if log_y {
            if let Some((_, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
                return Err(ExpError::config(format!(
                    "log scale needs positive values; column {name:?} contains {v}"
                )));
            }
        }
        series.push((name.clone(), pts));
    }
    let all = || series.iter().flat_map(|(_, pts)| pts.iter());
    let (x0, x1) = bounds(all().map(|p| p.0)).ok_or_else(|| ExpError::config("no data to plot"))?;
    let (y0, y1) = bounds(all().map(|p| p.1)).ok_or_else(|| ExpError::config("no data to plot"))?;

    let root = SVGBackend::with_string(svg, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut builder = ChartBuilder::on(&root);
    builder
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60);
    if log_y {
        let mut chart = builder
            .build_cartesian_2d(x0..x1, (y0..y1).log_scale())
            .map_err(plot_err)?;
        chart.configure_mesh().x_desc(x).draw().map_err(plot_err)?;
        for (i, (name, pts)) in series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            chart
                .draw_series(LineSeries::new(pts.iter().copied(), &color))
                .map_err(plot_err)?
                .label(name.as_str())
                .legend(move |(a, b)| PathElement::new(vec![(a, b), (a + 15, b)], color));
        }
        chart
            .configure_series_labels()
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
    } else {
        let mut chart = builder
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(plot_err)?;
        chart.configure_mesh().x_desc(x).draw().map_err(plot_err)?;
        for (i, (name, pts)) in series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            chart
                .draw_series(LineSeries::new(pts.iter().copied(), &color))
                .map_err(plot_err)?
                .label(name.as_str())
                .legend(move |(a, b)| PathElement::new(vec![(a, b), (a + 15, b)], color));
        }
        chart
            .configure_series_labels()
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
    }
    root.present().map_err(plot_err)?;
    Ok(())
}

fn grid_step(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
        .min(1.0)
}

fn heatmap(table: &Table, x: &str, y: &str, value: &str, svg: &mut String) -> Result<()> {
    let (xi, yi, vi) = (
        table.column_index(x)?,
        table.column_index(y)?,
        table.column_index(value)?,
    );
    let mut cells = Vec::new();
    for row in &table.rows {
        match (row[xi], row[yi], row[vi]) {
            (Some(a), Some(b), Some(v)) => cells.push((a, b, v)),
            _ => return Err(ExpError::config("heatmap rows must be complete")),
        }
    }
    if cells.is_empty() {
        return Err(ExpError::config("no data to plot"));
    }
    let xs: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let ys: Vec<f64> = cells.iter().map(|c| c.1).collect();
    let (hx, hy) = (grid_step(&xs), grid_step(&ys));
    let (x0, x1) = bounds(xs.iter().copied()).expect("nonempty");
    let (y0, y1) = bounds(ys.iter().copied()).expect("nonempty");

    let root = SVGBackend::with_string(svg, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0 - hx / 2.0..x1 + hx / 2.0, y0 - hy / 2.0..y1 + hy / 2.0)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .disable_mesh()
        .x_desc(x)
        .y_desc(y)
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(cells.iter().map(|&(a, b, v)| {
            let level = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
            Rectangle::new(
                [(a - hx / 2.0, b - hy / 2.0), (a + hx / 2.0, b + hy / 2.0)],
                RGBColor(level, level, level).filled(),
            )
        }))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phase_table() -> Table {
        let mut t = Table::new(vec!["p".into(), "m_over_nr".into(), "success_rate".into()]);
        for (p, m, s) in [
            (0.0, 2.0, 1.0),
            (0.0, 3.0, 1.0),
            (0.1, 2.0, 0.0),
            (0.1, 3.0, 0.6),
        ] {
            t.rows.push(vec![Some(p), Some(m), Some(s)]);
        }
        t
    }

    #[test]
    fn heatmap_has_one_cell_per_row_and_is_deterministic() {
        let spec = PlotSpec::Heatmap {
            x: "p".into(),
            y: "m_over_nr".into(),
            value: "success_rate".into(),
        };
        let a = render_svg(&phase_table(), &spec).unwrap();
        let b = render_svg(&phase_table(), &spec).unwrap();
        assert_eq!(a, b);
        let filled = a.matches("<rect").count();
        // Background plus one rectangle per row.
        assert!(filled >= 5, "{filled}");
        assert!(a.contains("fill=\"#999999\""));
    }

    #[test]
    fn log_scale_rejects_nonpositive() {
        let mut t = Table::new(vec!["k".into(), "d".into()]);
        t.rows.push(vec![Some(0.0), Some(1.0)]);
        t.rows.push(vec![Some(1.0), Some(0.0)]);
        let spec = PlotSpec::Line {
            x: "k".into(),
            y: vec!["d".into()],
            log_y: true,
        };
        let err = render_svg(&t, &spec).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("positive"));
    }

    #[test]
    fn line_plot_renders() {
        let mut t = Table::new(vec!["k".into(), "d".into()]);
        for k in 0..10 {
            t.rows.push(vec![Some(k as f64), Some(0.5f64.powi(k))]);
        }
        let spec = PlotSpec::Line {
            x: "k".into(),
            y: vec!["d".into()],
            log_y: true,
        };
        let svg = render_svg(&t, &spec).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<polyline"));
    }
}
