//! Self-describing experiment results and their CSV and JSON renderings.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::config::OutputFormat;
use crate::error::CliResult;

/// Where a column's numbers come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Input,
    BallExact,
    Fem2d,
    Perturb,
    Derived,
}

impl Source {
    fn tag(self) -> &'static str {
        match self {
            Source::Input => "input",
            Source::BallExact => "ball-exact",
            Source::Fem2d => "fem2d",
            Source::Perturb => "perturb",
            Source::Derived => "derived",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub source: Source,
}

impl Column {
    pub fn new(name: &str, unit: &str, source: Source) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            source,
        }
    }

    fn header(&self) -> String {
        format!("{} [{}] ({})", self.name, self.unit, self.source.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Flag(bool),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            // shortest round-trip representation
            Cell::Num(x) => format!("{x:e}"),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(o: Option<T>) -> Self {
        o.map_or(Cell::Empty, Into::into)
    }
}

/// A named pass/fail criterion. `value` and `threshold` are absent for
/// structural checks such as monotonicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value: Some(value),
            threshold: Some(threshold),
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value: Some(value),
            threshold: Some(threshold),
            pass: value >= threshold,
        }
    }

    pub fn holds(name: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            value: None,
            threshold: None,
            pass,
        }
    }
}

/// A two-column series ready for plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plot {
    pub x: Column,
    pub y: Column,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub inputs: BTreeMap<String, String>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub checks: Vec<Check>,
    pub plot: Option<Plot>,
    /// Reported on stderr only, so that files stay reproducible.
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl ResultRecord {
    pub fn new(experiment: &str, inputs: &BTreeMap<String, String>, columns: Vec<Column>) -> Self {
        Self {
            experiment: experiment.into(),
            inputs: inputs.clone(),
            columns,
            rows: Vec::new(),
            checks: Vec::new(),
            plot: None,
            wall_clock: Duration::ZERO,
        }
    }

    /// Appends a row; the cell count must match the columns.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width for {}",
            self.experiment
        );
        self.rows.push(row);
    }

    pub fn write_table_csv(&self, w: impl Write) -> CliResult<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.columns.iter().map(Column::header))?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::render))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_checks_csv(&self, w: impl Write) -> CliResult<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["check", "value", "threshold", "pass"])?;
        for c in &self.checks {
            out.write_record([
                c.name.clone(),
                Cell::from(c.value).render(),
                Cell::from(c.threshold).render(),
                c.pass.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_plot_csv(&self, w: impl Write) -> CliResult<()> {
        let mut out = csv::Writer::from_writer(w);
        if let Some(p) = &self.plot {
            out.write_record([p.x.header(), p.y.header()])?;
            for [x, y] in &p.points {
                out.write_record([format!("{x:e}"), format!("{y:e}")])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json(&self, mut w: impl Write) -> CliResult<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    /// Writes to `out`, or to stdout when absent. CSV output also writes
    /// `<stem>.checks.csv`; both formats write `<stem>.plot.csv` when a plot
    /// exists. Returns the files written.
    pub fn emit(&self, format: OutputFormat, out: Option<&Path>) -> CliResult<Vec<PathBuf>> {
        let Some(path) = out else {
            let stdout = std::io::stdout();
            match format {
                OutputFormat::Csv => self.write_table_csv(stdout.lock())?,
                OutputFormat::Json => self.write_json(stdout.lock())?,
            }
            return Ok(Vec::new());
        };
        let mut written = vec![path.to_path_buf()];
        let create = |p: &Path| std::fs::File::create(p).map(std::io::BufWriter::new);
        match format {
            OutputFormat::Csv => {
                self.write_table_csv(create(path)?)?;
                let checks = sibling(path, "checks");
                self.write_checks_csv(create(&checks)?)?;
                written.push(checks);
            }
            OutputFormat::Json => self.write_json(create(path)?)?,
        }
        if self.plot.is_some() {
            let plot = sibling(path, "plot");
            self.write_plot_csv(create(&plot)?)?;
            written.push(plot);
        }
        Ok(written)
    }

    /// Human-readable check summary and timing, for stderr.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let status = if c.pass { "PASS" } else { "FAIL" };
            match (c.value, c.threshold) {
                (Some(v), Some(t)) => {
                    s.push_str(&format!("{status} {} ({v:.3e} vs {t:.3e})\n", c.name))
                }
                _ => s.push_str(&format!("{status} {}\n", c.name)),
            }
        }
        s.push_str(&format!(
            "{}: {} rows, wall-clock {:.3} s\n",
            self.experiment,
            self.rows.len(),
            self.wall_clock.as_secs_f64()
        ));
        s
    }
}

/// `dir/stem.<suffix>.csv` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("result");
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}
