//! `# key=value` comment block, one header row, comma-separated rows.

use crate::error::{CliError, CliResult};
use std::fmt::Write as _;
use std::path::Path;

/// Seventeen significant digits: parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document<C> {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<C>>,
}

pub type Series = Document<f64>;
pub type Records = Document<String>;

impl<C> Document<C> {
    pub fn new(meta: Vec<(String, String)>, columns: Vec<String>) -> Self {
        Self {
            meta,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    fn render_with(&self, cell: impl Fn(&C) -> String) -> CliResult<String> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            if k.contains(['=', '\n']) || v.contains('\n') {
                return Err(CliError::Csv(format!(
                    "metadata entry {k:?} cannot be encoded"
                )));
            }
            writeln!(out, "# {k}={v}").unwrap();
        }
        if let Some(bad) = self
            .columns
            .iter()
            .find(|c| c.contains([',', '\n']) || c.starts_with('#'))
        {
            return Err(CliError::Csv(format!(
                "column name {bad:?} cannot be encoded"
            )));
        }
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            if row.len() != self.columns.len() {
                return Err(CliError::Csv(format!(
                    "row has {} cells, header has {}",
                    row.len(),
                    self.columns.len()
                )));
            }
            let cells: Vec<String> = row.iter().map(&cell).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        Ok(out)
    }

    fn parse_with(text: &str, cell: impl Fn(&str) -> CliResult<C>) -> CliResult<Self> {
        let mut meta = Vec::new();
        let mut lines = text.lines();
        let header = loop {
            let line = lines
                .next()
                .ok_or_else(|| CliError::Csv("no header row".into()))?;
            match line.strip_prefix("# ") {
                Some(entry) => {
                    let (k, v) = entry
                        .split_once('=')
                        .ok_or_else(|| CliError::Csv(format!("comment without `=`: {line:?}")))?;
                    meta.push((k.to_string(), v.to_string()));
                }
                None => break line,
            }
        };
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let row = line.split(',').map(&cell).collect::<CliResult<Vec<C>>>()?;
            if row.len() != columns.len() {
                return Err(CliError::Csv(format!(
                    "data row {} has {} cells",
                    n + 1,
                    row.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self {
            meta,
            columns,
            rows,
        })
    }
}

impl Series {
    pub fn render(&self) -> CliResult<String> {
        self.render_with(|v| format_value(*v))
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        Self::parse_with(text, |s| {
            s.parse()
                .map_err(|_| CliError::Csv(format!("not a number: {s:?}")))
        })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

impl Records {
    pub fn render(&self) -> CliResult<String> {
        if let Some(bad) = self.rows.iter().flatten().find(|c| c.contains([',', '\n'])) {
            return Err(CliError::Csv(format!("cell {bad:?} cannot be encoded")));
        }
        self.render_with(Clone::clone)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        Self::parse_with(text, |s| Ok(s.to_string()))
    }
}

pub fn write(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_series(path: &Path) -> CliResult<Series> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Series::parse(&text)
}
