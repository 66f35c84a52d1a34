//! Experiment configuration: a flat `key = value` file, overridden key by key
//! from the command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Symmetric-function order: one `h`, or every `h` from 1 to the partition size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Single(usize),
    All,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub dimension: Option<usize>,
    pub mass: Option<f64>,
    pub eps_grid: Option<Vec<f64>>,
    pub refinement: Option<u32>,
    pub count: Option<usize>,
    pub indices: Option<Vec<usize>>,
    pub clusters: Option<Vec<Vec<usize>>>,
    pub order: Option<Order>,
    pub amplitude: Option<f64>,
    pub symmetry: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub mesh: Option<PathBuf>,
    raw: BTreeMap<String, String>,
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key} = {value:?}: {why}"))
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| bad(key, value, e))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(|s| number(key, s)).collect()
}

fn index_set(key: &str, value: &str) -> CliResult<Vec<usize>> {
    let v = if let Some((a, b)) = value.split_once("..") {
        let (a, b): (usize, usize) = (number(key, a)?, number(key, b)?);
        (a..b).collect()
    } else {
        list(key, value)?
    };
    if v.is_empty() {
        return Err(bad(key, value, "empty index set"));
    }
    Ok(v)
}

fn positive(key: &str, value: &str, x: f64) -> CliResult<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(bad(key, value, "must be positive and finite"))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::ConfigLine {
                line: i + 1,
                msg: format!("expected `key = value`, got {line:?}"),
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| CliError::ConfigLine {
                    line: i + 1,
                    msg: e.to_string(),
                })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key; later calls win, which is how command-line flags override
    /// the file.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "dimension" => {
                let d: usize = number(key, value)?;
                if d < 2 {
                    return Err(bad(key, value, "dimension must be at least 2"));
                }
                self.dimension = Some(d);
            }
            "mass" => self.mass = Some(positive(key, value, number(key, value)?)?),
            "eps_grid" => {
                let grid: Vec<f64> = list(key, value)?;
                if grid.iter().any(|&e| !(e > 0.0)) {
                    return Err(bad(key, value, "ε values must be positive"));
                }
                if grid.windows(2).any(|w| !(w[1] < w[0])) {
                    return Err(bad(key, value, "grid must be strictly decreasing"));
                }
                self.eps_grid = Some(grid);
            }
            "refinement" => {
                let r: u32 = number(key, value)?;
                if !(1..=12).contains(&r) {
                    return Err(bad(key, value, "refinement must be in 1..=12"));
                }
                self.refinement = Some(r);
            }
            "count" => {
                let c: usize = number(key, value)?;
                if c == 0 {
                    return Err(bad(key, value, "count must be at least 1"));
                }
                self.count = Some(c);
            }
            "indices" => self.indices = Some(index_set(key, value)?),
            "clusters" => {
                let sets = value
                    .split(';')
                    .map(|s| index_set(key, s))
                    .collect::<CliResult<Vec<_>>>()?;
                self.clusters = Some(sets);
            }
            "order" => {
                self.order = Some(if value.eq_ignore_ascii_case("all") {
                    Order::All
                } else {
                    let h: usize = number(key, value)?;
                    if h == 0 {
                        return Err(bad(key, value, "order must be at least 1"));
                    }
                    Order::Single(h)
                });
            }
            "amplitude" => {
                let a: f64 = number(key, value)?;
                if !(a.abs() < 1.0) {
                    return Err(bad(
                        key,
                        value,
                        "|a| must be below 1 to keep 1 + a cos θ positive",
                    ));
                }
                self.amplitude = Some(a);
            }
            "symmetry" => {
                let n: usize = number(key, value)?;
                if n == 0 {
                    return Err(bad(key, value, "symmetry order must be at least 1"));
                }
                self.symmetry = Some(n);
            }
            "trials" => {
                let t: usize = number(key, value)?;
                if t == 0 {
                    return Err(bad(key, value, "at least one trial is required"));
                }
                self.trials = Some(t);
            }
            "seed" => self.seed = Some(number(key, value)?),
            "format" => {
                self.format = Some(match value {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => return Err(bad(key, value, "expected `csv` or `json`")),
                });
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "jobs" => {
                let j: usize = number(key, value)?;
                if j == 0 {
                    return Err(bad(key, value, "jobs must be at least 1"));
                }
                self.jobs = Some(j);
            }
            "mesh" => self.mesh = Some(PathBuf::from(value)),
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        self.raw.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// The keys that were set, as given, for echoing into results.
    pub fn echo(&self) -> &BTreeMap<String, String> {
        &self.raw
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or_default()
    }
}
