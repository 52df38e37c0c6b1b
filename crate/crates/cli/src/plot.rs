//! Static SVG figures: line plots for tables, heatmaps for grids.

use crate::error::{CliError, CliResult};
use pairdyn::experiments::{ExperimentResult, Grid, Table};
use plotters::prelude::*;
use std::path::{Path, PathBuf};

/// Larger grids are strided down to keep the SVGs small.
const MAX_CELLS_PER_AXIS: usize = 120;

fn plot_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Plot {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn span(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if lo > hi {
        return None;
    }
    let pad = if hi > lo {
        0.05 * (hi - lo)
    } else {
        0.5 * lo.abs().max(1.0)
    };
    Some((lo - pad, hi + pad))
}

pub fn line_plot(path: &Path, title: &str, table: &Table) -> CliResult<()> {
    if table.is_empty() || table.columns.is_empty() {
        return Err(plot_err(path, "empty series"));
    }
    let xs = table.abscissae();
    let (x0, x1) = span(xs.iter().copied()).ok_or_else(|| plot_err(path, "no finite abscissae"))?;
    let (y0, y1) = span(table.rows.iter().flat_map(|(_, r)| r.iter().copied()))
        .ok_or_else(|| plot_err(path, "no finite values"))?;

    let root = SVGBackend::new(path, (900, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(path, e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| plot_err(path, e))?;
    chart
        .configure_mesh()
        .x_desc(table.abscissa.as_str())
        .draw()
        .map_err(|e| plot_err(path, e))?;
    for (i, name) in table.columns.iter().enumerate() {
        let colour = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(
                table
                    .rows
                    .iter()
                    .map(|(x, r)| (*x, r[i]))
                    .filter(|(_, y)| y.is_finite()),
                colour.stroke_width(2),
            ))
            .map_err(|e| plot_err(path, e))?
            .label(name.as_str())
            .legend(move |(x, y)| {
                PathElement::new(vec![(x, y), (x + 18, y)], colour.stroke_width(2))
            });
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .draw()
        .map_err(|e| plot_err(path, e))?;
    root.present().map_err(|e| plot_err(path, e))
}

fn ramp(v: f64) -> RGBColor {
    // Dark blue through teal to yellow.
    let stops = [
        (0.0, (38, 12, 84)),
        (0.5, (33, 145, 140)),
        (1.0, (253, 231, 37)),
    ];
    let v = v.clamp(0.0, 1.0);
    let (lo, hi) = if v < 0.5 {
        (stops[0], stops[1])
    } else {
        (stops[1], stops[2])
    };
    let f = (v - lo.0) / (hi.0 - lo.0);
    let mix = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
    RGBColor(
        mix(lo.1 .0, hi.1 .0),
        mix(lo.1 .1, hi.1 .1),
        mix(lo.1 .2, hi.1 .2),
    )
}

fn axis_step(values: &[f64], i: usize) -> f64 {
    match (values.get(i.wrapping_sub(1)), values.get(i + 1)) {
        (_, Some(next)) => next - values[i],
        (Some(prev), None) => values[i] - prev,
        _ => 1.0,
    }
}

pub fn heatmap(path: &Path, title: &str, grid: &Grid) -> CliResult<()> {
    if grid.x.is_empty() || grid.y.is_empty() {
        return Err(plot_err(path, "empty grid"));
    }
    let (lo, hi) =
        span(grid.values.iter().copied()).ok_or_else(|| plot_err(path, "no finite values"))?;
    let (sx, sy) = (
        grid.x.len().div_ceil(MAX_CELLS_PER_AXIS),
        grid.y.len().div_ceil(MAX_CELLS_PER_AXIS),
    );
    let x_lo = grid.x[0] - axis_step(&grid.x, 0) / 2.0;
    let x_hi = grid.x[grid.x.len() - 1] + axis_step(&grid.x, grid.x.len() - 1) / 2.0;
    let y_lo = grid.y[0] - axis_step(&grid.y, 0) / 2.0;
    let y_hi = grid.y[grid.y.len() - 1] + axis_step(&grid.y, grid.y.len() - 1) / 2.0;

    let root = SVGBackend::new(path, (640, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(path, e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(x_lo..x_hi, y_lo..y_hi)
        .map_err(|e| plot_err(path, e))?;
    chart
        .configure_mesh()
        .disable_mesh()
        .x_desc(grid.x_label.as_str())
        .y_desc(grid.y_label.as_str())
        .draw()
        .map_err(|e| plot_err(path, e))?;
    let cells = (0..grid.x.len())
        .step_by(sx)
        .flat_map(|i| (0..grid.y.len()).step_by(sy).map(move |j| (i, j)));
    chart
        .draw_series(cells.map(|(i, j)| {
            let (x, y) = (grid.x[i], grid.y[j]);
            let (w, h) = (
                axis_step(&grid.x, i) * sx as f64,
                axis_step(&grid.y, j) * sy as f64,
            );
            let v = (grid.value(i, j) - lo) / (hi - lo);
            Rectangle::new(
                [(x - w / 2.0, y - h / 2.0), (x + w / 2.0, y + h / 2.0)],
                ramp(v).filled(),
            )
        }))
        .map_err(|e| plot_err(path, e))?;
    root.present().map_err(|e| plot_err(path, e))
}

/// One line plot per table and one heatmap per grid, written into `dir`.
pub fn emit_plot(result: &ExperimentResult, dir: &Path) -> CliResult<Vec<PathBuf>> {
    if result.tables.is_empty() && result.grids.is_empty() {
        return Err(plot_err(dir, "result holds no series"));
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    for (name, table) in &result.tables {
        let path = dir.join(format!("{name}.svg"));
        line_plot(&path, &format!("{} {name}", result.kind), table)?;
        written.push(path);
    }
    for (name, grid) in &result.grids {
        let path = dir.join(format!("{name}.svg"));
        heatmap(&path, &format!("{} {name}", result.kind), grid)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_series_is_refused() {
        let dir = std::env::temp_dir().join(format!("pairdyn-plot-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let err = line_plot(&dir.join("empty.svg"), "empty", &Table::new("t", ["a"])).unwrap_err();
        assert!(matches!(err, CliError::Plot { .. }));
        assert_eq!(err.exit_code(), 3);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), RGBColor(38, 12, 84));
        assert_eq!(ramp(1.0), RGBColor(253, 231, 37));
        assert_eq!(ramp(7.0), ramp(1.0));
    }
}
