//! Experiment runner for `radon-core`: JSON configs in, `results.json`,
//! `results.csv` and `plot.svg` out.

pub mod config;
pub mod experiments;
pub mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use radon_core::fixtures::{Fixture, FixtureError, FixtureStore};
use radon_core::Estimate;
use serde::{Deserialize, Serialize};

pub use config::{Experiment, MarcFamily, RunConfig};
pub use plot::{plot_loglog, Plot, Series};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid config (line {line}): {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    MissingFixture(String),
    #[error("cannot write output: {0}")]
    Unwritable(String),
    #[error("{0}")]
    HashMismatch(String),
    #[error(transparent)]
    Compute(#[from] radon_core::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config { .. } | LabError::Compute(_) => 2,
            LabError::MissingFixture(_) => 3,
            LabError::Unwritable(_) => 4,
            LabError::HashMismatch(_) => 5,
        }
    }
}

impl From<FixtureError> for LabError {
    fn from(e: FixtureError) -> Self {
        match e {
            FixtureError::Missing { .. } => LabError::MissingFixture(e.to_string()),
            FixtureError::HashMismatch { .. } => LabError::HashMismatch(e.to_string()),
            FixtureError::Io(m) => LabError::Unwritable(m),
            FixtureError::Compute(c) => LabError::Compute(c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureRef {
    pub name: String,
    pub hash: String,
}

impl From<&Fixture> for FixtureRef {
    fn from(f: &Fixture) -> Self {
        FixtureRef { name: f.name.clone(), hash: f.hash.clone() }
    }
}

/// One reported number. Rational and boolean results go in `exact`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub exact: Option<String>,
    pub units: String,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub fixture: Option<FixtureRef>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl Metric {
    pub fn value(name: impl Into<String>, v: f64, units: &str) -> Self {
        Metric {
            name: name.into(),
            value: finite(v),
            stderr: None,
            exact: None,
            units: units.into(),
            seed: None,
            samples: None,
            fixture: None,
        }
    }

    pub fn exact(name: impl Into<String>, v: impl ToString, units: &str) -> Self {
        Metric { exact: Some(v.to_string()), ..Metric::value(name, f64::NAN, units) }
    }

    pub fn estimate(name: impl Into<String>, e: &Estimate, units: &str, seed: u64) -> Self {
        Metric {
            stderr: finite(e.stderr),
            seed: Some(seed),
            samples: Some(e.samples),
            ..Metric::value(name, e.value, units)
        }
    }

    pub fn with_fixture(mut self, f: &Fixture) -> Self {
        self.fixture = Some(f.into());
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// Comma separated, `\n` line endings, `.` decimals.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// What an experiment produces before it is written out.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub metrics: Vec<Metric>,
    pub table: Table,
    pub series: Vec<Series>,
    /// Detected inequality violations or fixture disagreements.
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub workers: usize,
    pub wall_time_s: f64,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub model: Option<String>,
    pub seed: u64,
    pub budget: Option<u64>,
    pub config_hash: String,
    pub metrics: Vec<Metric>,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
    pub plot_dropped: usize,
    pub run: RunInfo,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overwrite fixtures that disagree with the store.
    pub force: bool,
    /// Fixture store; `None` uses `$LAB_FIXTURES` or the committed store.
    pub fixtures: Option<PathBuf>,
}

impl RunOptions {
    pub fn store(&self) -> FixtureStore {
        match &self.fixtures {
            Some(d) => FixtureStore::new(d),
            None => FixtureStore::default_location(),
        }
    }
}

/// Runs the experiment without touching the output directory.
pub fn execute(cfg: &RunConfig, opts: &RunOptions) -> Result<(ResultRecord, Outcome, Plot), LabError> {
    let start = Instant::now();
    let outcome = experiments::dispatch(cfg, opts)?;
    let plot = plot_loglog(&outcome.series, true);
    let mut warnings = outcome.warnings.clone();
    warnings.extend(plot.warnings.iter().cloned());
    let record = ResultRecord {
        experiment: cfg.experiment.name().to_string(),
        model: cfg.model.clone(),
        seed: cfg.seed,
        budget: cfg.budget,
        config_hash: cfg.hash(),
        metrics: outcome.metrics.clone(),
        violations: outcome.violations.clone(),
        warnings,
        plot_dropped: plot.dropped,
        run: RunInfo {
            workers: cfg.workers,
            wall_time_s: start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    };
    Ok((record, outcome, plot))
}

fn write(path: &Path, text: &str) -> Result<(), LabError> {
    fs::write(path, text).map_err(|e| LabError::Unwritable(format!("{}: {e}", path.display())))
}

/// Runs the experiment and writes `results.json`, `results.csv` and `plot.svg`.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<ResultRecord, LabError> {
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir).map_err(|e| LabError::Unwritable(format!("{}: {e}", dir.display())))?;
    // fail before the computation if the directory is read-only
    let probe = dir.join(".lab-write-probe");
    write(&probe, "")?;
    let _ = fs::remove_file(&probe);
    let (record, outcome, plot) = execute(cfg, opts)?;
    let mut json = serde_json::to_string_pretty(&record).expect("serializable");
    json.push('\n');
    write(&dir.join("results.json"), &json)?;
    write(&dir.join("results.csv"), &outcome.table.to_csv())?;
    write(&dir.join("plot.svg"), &plot.svg)?;
    Ok(record)
}
