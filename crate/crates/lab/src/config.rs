use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Triangle,
    Knapp,
    Sublevel,
    Ttt,
    Marc,
    Bracket,
    OracleRefresh,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Triangle => "triangle",
            Experiment::Knapp => "knapp",
            Experiment::Sublevel => "sublevel",
            Experiment::Ttt => "ttt",
            Experiment::Marc => "marc",
            Experiment::Bracket => "bracket",
            Experiment::OracleRefresh => "oracle-refresh",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarcFamily {
    Maximal,
    Harmonic,
}

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUTPUT_DIR: &str = "lab-out";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads for Monte Carlo; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    /// Parameter family of the `marc` experiment.
    #[serde(default)]
    pub params: Option<MarcFamily>,
    /// Number of random set pairs (`ttt`, `sublevel`).
    #[serde(default)]
    pub pairs: Option<usize>,
    /// Exponent points `(1/q_L, 1/q_R)` as rational strings for `knapp` verdicts.
    #[serde(default)]
    pub points: Option<Vec<[String; 2]>>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// 1-based line of the first occurrence of `"key"`, else 1.
fn line_of(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, LabError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| LabError::Config { line: e.line().max(1), message: e.to_string() })?;
        cfg.validate().map_err(|(key, message)| LabError::Config { line: line_of(text, key), message })?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config { line: 0, message: format!("{}: {e}", path.display()) })?;
        Self::parse(&text)
    }

    /// Semantic checks; errors name the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if let Some(m) = &self.model {
            radon_core::Model::from_id(m).map_err(|e| ("model", e.to_string()))?;
        }
        if let Some(eps) = &self.epsilons {
            if eps.len() < 4 {
                return Err(("epsilons", "need at least four scales".into()));
            }
            if eps.iter().any(|e| !(*e > 0.0 && *e <= 0.25)) {
                return Err(("epsilons", "scales must lie in (0, 1/4]".into()));
            }
            if eps.windows(2).any(|w| w[1] >= w[0]) {
                return Err(("epsilons", "scales must be strictly decreasing".into()));
            }
        }
        if let Some(al) = &self.alphas {
            if al.len() < 2 || al.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                return Err(("alphas", "need at least two positive thresholds".into()));
            }
        }
        if self.budget == Some(0) {
            return Err(("budget", "budget must be positive".into()));
        }
        if self.pairs == Some(0) {
            return Err(("pairs", "pairs must be positive".into()));
        }
        if let Some(points) = &self.points {
            for p in points {
                for c in p {
                    parse_rational(c).map_err(|m| ("points", m))?;
                }
            }
        }
        Ok(())
    }

    /// Hash of the settings that determine the values, so worker count and
    /// output location are excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = 0;
        c.output_dir = None;
        let mut h = Sha256::new();
        h.update(serde_json::to_string(&c).expect("serializable").as_bytes());
        hex::encode(h.finalize())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }
}

pub fn parse_rational(s: &str) -> Result<radon_core::Rational, String> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: i64 = n.parse().map_err(|_| format!("`{s}` is not a rational"))?;
    let d: i64 = d.parse().map_err(|_| format!("`{s}` is not a rational"))?;
    if d == 0 {
        return Err(format!("`{s}` has zero denominator"));
    }
    Ok(radon_core::Rational::new(n, d))
}
