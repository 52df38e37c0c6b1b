//! Runs experiments and writes their artifacts.

use crate::config::RunConfig;
use crate::csv::{self, format_value, Records, Series};
use crate::error::{CliError, CliResult};
use crate::plot;
use crate::verify::{self, Bound, Kind};
use pairdyn::experiments::{
    run_bloch, run_free_spread, run_mzi, run_thermalization, ExperimentResult, Grid, Table,
    BLOCH_DELTAS,
};
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Output directory, plot switch, and everything written so far.
pub struct Session {
    pub cfg: RunConfig,
    pub root: PathBuf,
    pub written: Vec<PathBuf>,
    /// Human-readable summary lines, one per finding.
    pub log: Vec<String>,
}

impl Session {
    pub fn new(cfg: RunConfig) -> Self {
        let root = cfg.output_dir();
        Self {
            cfg,
            root,
            written: Vec::new(),
            log: Vec::new(),
        }
    }

    fn header(result: &ExperimentResult) -> Vec<(String, String)> {
        let mut meta = vec![
            ("experiment".to_string(), result.kind.to_string()),
            ("version".to_string(), VERSION.to_string()),
        ];
        meta.extend(result.parameters.iter().cloned());
        meta.extend(
            result
                .summary
                .iter()
                .map(|(k, v)| (format!("summary.{k}"), v.clone())),
        );
        meta.extend(
            result
                .warnings
                .iter()
                .map(|w| ("warning".to_string(), w.clone())),
        );
        meta
    }

    fn emit(&mut self, path: PathBuf, text: &str) -> CliResult<()> {
        csv::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }

    /// Writes `columns` of `table` (renamed to `labels`) under the abscissa.
    fn write_table(
        &mut self,
        dir: &Path,
        file: &str,
        result: &ExperimentResult,
        table: &Table,
        columns: &[(&str, &str)],
    ) -> CliResult<()> {
        let mut names = vec![table.abscissa.clone()];
        let mut idx = Vec::new();
        for (col, label) in columns {
            idx.push(
                table
                    .columns
                    .iter()
                    .position(|c| c == col)
                    .ok_or_else(|| CliError::Csv(format!("result has no column {col}")))?,
            );
            names.push(label.to_string());
        }
        let mut doc = Series::new(Self::header(result), names);
        for (x, row) in &table.rows {
            let mut r = vec![*x];
            r.extend(idx.iter().map(|&i| row[i]));
            doc.rows.push(r);
        }
        self.emit(dir.join(file), &doc.render()?)
    }

    fn write_full_table(
        &mut self,
        dir: &Path,
        file: &str,
        result: &ExperimentResult,
        table: &Table,
    ) -> CliResult<()> {
        let cols: Vec<(&str, &str)> = table
            .columns
            .iter()
            .map(|c| (c.as_str(), c.as_str()))
            .collect();
        self.write_table(dir, file, result, table, &cols)
    }

    fn write_grid(
        &mut self,
        dir: &Path,
        file: &str,
        result: &ExperimentResult,
        grid: &Grid,
        value: &str,
    ) -> CliResult<()> {
        let mut doc = Series::new(
            Self::header(result),
            vec![
                grid.x_label.clone(),
                grid.y_label.clone(),
                value.to_string(),
            ],
        );
        for (i, x) in grid.x.iter().enumerate() {
            for (j, y) in grid.y.iter().enumerate() {
                doc.rows.push(vec![*x, *y, grid.value(i, j)]);
            }
        }
        self.emit(dir.join(file), &doc.render()?)
    }

    fn finish(&mut self, dir: &Path, label: &str, result: &ExperimentResult) -> CliResult<()> {
        if self.cfg.plots() {
            let paths = plot::emit_plot(result, &dir.join("plots"))?;
            self.written.extend(paths);
        }
        let mut line = format!("{label}:");
        for (k, v) in result.parameters.iter().filter(|(k, _)| k == "duration") {
            line.push_str(&format!(" {k}={v}"));
        }
        for (k, v) in &result.summary {
            line.push_str(&format!(" {k}={v}"));
        }
        self.log.push(line);
        for w in &result.warnings {
            self.log.push(format!("{label}: warning: {w}"));
        }
        Ok(())
    }

    pub fn free(&mut self) -> CliResult<()> {
        let cfg = self.cfg.free()?;
        let result = run_free_spread(&cfg)?;
        let dir = self.root.join("free");
        self.write_full_table(
            &dir,
            "spreads.csv",
            &result,
            result.table("spreads").expect("spreads table"),
        )?;
        for (name, grid) in &result.grids {
            self.write_grid(&dir, &format!("{name}.csv"), &result, grid, "density")?;
        }
        self.finish(&dir, "free", &result)
    }

    pub fn thermal(&mut self) -> CliResult<()> {
        let cfg = self.cfg.thermal()?;
        let result = run_thermalization(&cfg)?;
        let dir = self.root.join("thermal");
        self.write_full_table(
            &dir,
            "spreads.csv",
            &result,
            result.table("spreads").expect("spreads table"),
        )?;
        for (name, grid) in &result.grids {
            self.write_grid(&dir, &format!("{name}.csv"), &result, grid, "density")?;
        }
        self.finish(&dir, "thermal", &result)
    }

    pub fn mzi(&mut self) -> CliResult<()> {
        for preset in self.cfg.presets()? {
            let cfg = self.cfg.mzi(preset)?;
            let coarse = cfg.d / 4;
            let only = self.cfg.delta_filter(&[coarse, 4, 1])?;
            let result = run_mzi(&cfg)?;
            let table = result.table("d3_vs_phi").expect("d3 table");
            let dir = self.root.join(format!("mzi_{}", preset.name()));
            let series: [(usize, &[(&str, &str)]); 3] = [
                (
                    coarse,
                    &[("d3_delta10", "d3"), ("cross_cell_delta10", "cross_cell")],
                ),
                (
                    4,
                    &[("d3_delta4", "d3"), ("cross_cell_delta4", "cross_cell")],
                ),
                (1, &[("d3_point", "d3")]),
            ];
            for (delta, cols) in series {
                if only.is_none_or(|o| o == delta) {
                    self.write_table(
                        &dir,
                        &format!("d3_vs_phi_delta{delta}.csv"),
                        &result,
                        table,
                        cols,
                    )?;
                }
            }
            self.finish(&dir, &format!("mzi {preset}"), &result)?;
        }
        Ok(())
    }

    pub fn bloch(&mut self) -> CliResult<()> {
        for preset in self.cfg.presets()? {
            let cfg = self.cfg.bloch(preset)?;
            let mut allowed = BLOCH_DELTAS.to_vec();
            allowed.push(1);
            let only = self.cfg.delta_filter(&allowed)?;
            let result = run_bloch(&cfg)?;
            let table = result.table("d2_vs_t").expect("d2 table");
            let dir = self.root.join(format!("bloch_{}", preset.name()));
            for delta in allowed {
                if only.is_some_and(|o| o != delta) {
                    continue;
                }
                let (d2, cross) = if delta == 1 {
                    ("d2_point".to_string(), None)
                } else {
                    (
                        format!("d2_delta{delta}"),
                        Some(format!("cross_cell_delta{delta}")),
                    )
                };
                let mut cols = vec![(d2.as_str(), "d2")];
                if let Some(c) = &cross {
                    cols.push((c.as_str(), "cross_cell"));
                }
                self.write_table(
                    &dir,
                    &format!("d2_vs_t_delta{delta}.csv"),
                    &result,
                    table,
                    &cols,
                )?;
            }
            let grid = result.grid("site_density").expect("site density");
            self.write_grid(&dir, "site_density.csv", &result, grid, "density")?;
            self.finish(&dir, &format!("bloch {preset}"), &result)?;
        }
        Ok(())
    }

    /// Writes the check table and locality series; fails if any invariant fails.
    pub fn verify(&mut self) -> CliResult<()> {
        let report = verify::run()?;
        let dir = self.root.join("verify");
        let meta = vec![
            ("experiment".to_string(), "verify".to_string()),
            ("version".to_string(), VERSION.to_string()),
        ];
        let columns = ["check", "kind", "comparison", "bound", "value", "status"];
        let mut doc = Records::new(meta, columns.iter().map(|c| c.to_string()).collect());
        for c in &report.checks {
            let (cmp, b) = match c.bound {
                Bound::AtMost(b) => ("at_most", b),
                Bound::AtLeast(b) => ("at_least", b),
            };
            let kind = match c.kind {
                Kind::Invariant => "invariant",
                Kind::KnownDiscrepancy => "known_discrepancy",
            };
            doc.rows.push(vec![
                c.name.to_string(),
                kind.to_string(),
                cmp.to_string(),
                format_value(b),
                format_value(c.value),
                c.status().to_string(),
            ]);
            self.log.push(format!("verify: {c}"));
        }
        self.emit(dir.join("checks.csv"), &doc.render()?)?;
        let locality = &report.locality;
        self.write_full_table(
            &dir,
            "locality.csv",
            locality,
            locality.table("locality").expect("locality table"),
        )?;
        if self.cfg.plots() {
            let paths = plot::emit_plot(locality, &dir.join("plots"))?;
            self.written.extend(paths);
        }
        match report.failures() {
            0 => Ok(()),
            n => Err(CliError::VerifyFailed(n)),
        }
    }

    pub fn all(&mut self) -> CliResult<()> {
        self.free()?;
        self.thermal()?;
        self.mzi()?;
        self.bloch()
    }
}
