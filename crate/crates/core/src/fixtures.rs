//! Frozen reference values and the oracles that produce them.
//!
//! A fixture is a JSON record `{name, value, stderr, seed, samples, hash}` with
//! `hash` the SHA-256 of `"blob <len>\0<payload>"`, where the payload is the
//! compact JSON of the other five fields in that order.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::knapp::{knapp_form, knapp_sets};
use crate::lattice::LatticeSet;
use crate::marc::{marc_explicit_constant, MarcParams};
use crate::mc::{mc_mean, Estimate, McConfig};
use crate::models::Model;
use crate::operator::AveragingOperator;
use crate::sublevel::{det2, mc_sublevel, weighted_mass_sup_3d};
use crate::ttt::{random_box_union_pair, refine, ttt_form};

pub const FIXTURE_ENV: &str = "LAB_FIXTURES";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    pub seed: u64,
    pub samples: u64,
    pub hash: String,
}

#[derive(Serialize)]
struct Payload<'a> {
    name: &'a str,
    value: f64,
    stderr: f64,
    seed: u64,
    samples: u64,
}

pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

impl Fixture {
    pub fn new(name: &str, est: Estimate, seed: u64) -> Fixture {
        let mut f = Fixture {
            name: name.to_string(),
            value: est.value,
            stderr: est.stderr,
            seed,
            samples: est.samples,
            hash: String::new(),
        };
        f.hash = f.expected_hash();
        f
    }

    pub fn expected_hash(&self) -> String {
        let p = Payload { name: &self.name, value: self.value, stderr: self.stderr, seed: self.seed, samples: self.samples };
        content_hash(serde_json::to_string(&p).expect("serializable").as_bytes())
    }

    pub fn is_intact(&self) -> bool {
        self.hash == self.expected_hash()
    }

    pub fn estimate(&self) -> Estimate {
        Estimate { value: self.value, stderr: self.stderr, samples: self.samples }
    }

    /// Whether `est` agrees with the fixture within `k` combined standard errors
    /// (or to 1e-12 relative when both are exact).
    pub fn agrees(&self, est: &Estimate, k: f64) -> bool {
        let sigma = self.stderr.hypot(est.stderr);
        (self.value - est.value).abs() <= k * sigma + 1e-12 * self.value.abs().max(est.value.abs())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("fixture `{name}` not found in {dir}; run `lab run configs/oracle-refresh.json`")]
    Missing { name: String, dir: String },
    #[error("fixture `{name}` hash mismatch: stored {stored}, content gives {computed}")]
    HashMismatch { name: String, stored: String, computed: String },
    #[error("fixture io: {0}")]
    Io(String),
    #[error(transparent)]
    Compute(#[from] Error),
}

/// Directory of fixture files.
#[derive(Clone, Debug)]
pub struct FixtureStore {
    dir: PathBuf,
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureStore { dir: dir.into() }
    }

    /// `$LAB_FIXTURES`, else the store committed with this crate.
    pub fn default_location() -> Self {
        match std::env::var_os(FIXTURE_ENV) {
            Some(d) => Self::new(d),
            None => Self::new(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.json"))
    }

    /// Loads and verifies a fixture.
    pub fn load(&self, name: &str) -> std::result::Result<Fixture, FixtureError> {
        let path = self.path(name);
        let text = fs::read_to_string(&path)
            .map_err(|_| FixtureError::Missing { name: name.to_string(), dir: self.dir.display().to_string() })?;
        let fx: Fixture = serde_json::from_str(&text).map_err(|e| FixtureError::Io(format!("{}: {e}", path.display())))?;
        if !fx.is_intact() {
            return Err(FixtureError::HashMismatch { name: name.to_string(), stored: fx.hash.clone(), computed: fx.expected_hash() });
        }
        Ok(fx)
    }

    /// Loads without verifying, for comparisons during a refresh.
    pub fn load_raw(&self, name: &str) -> Option<Fixture> {
        fs::read_to_string(self.path(name)).ok().and_then(|t| serde_json::from_str(&t).ok())
    }

    pub fn save(&self, fx: &Fixture) -> std::result::Result<PathBuf, FixtureError> {
        fs::create_dir_all(&self.dir).map_err(|e| FixtureError::Io(format!("{}: {e}", self.dir.display())))?;
        let path = self.path(&fx.name);
        let mut text = serde_json::to_string_pretty(fx).expect("serializable");
        text.push('\n');
        fs::write(&path, text).map_err(|e| FixtureError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// An oracle: a named reference computation with its everyday budget. Fixtures
/// are produced at [`ORACLE_FACTOR`] times that budget.
#[derive(Clone, Copy, Debug)]
pub struct Oracle {
    pub name: &'static str,
    pub run_samples: u64,
    pub seed: u64,
    compute: fn(&McConfig) -> Result<Estimate>,
}

pub const ORACLE_FACTOR: u64 = 10;

impl Oracle {
    pub fn compute(&self, cfg: &McConfig) -> Result<Estimate> {
        (self.compute)(cfg)
    }

    /// Everyday configuration, on a stream independent of the oracle's.
    pub fn run_config(&self) -> McConfig {
        McConfig::new(self.run_samples, self.seed.wrapping_add(1))
    }

    pub fn oracle_config(&self) -> McConfig {
        McConfig::new(self.run_samples * ORACLE_FACTOR, self.seed)
    }

    pub fn refresh(&self, workers: usize) -> Result<Fixture> {
        let est = self.compute(&self.oracle_config().with_workers(workers))?;
        Ok(Fixture::new(self.name, est, self.seed))
    }
}

/// Parameters of the strip oracle: `1 ≤ |x| < 2`, half-width `0.1`.
pub const STRIP_PARAMS: (f64, f64, f64) = (1.0, 2.0, 0.1);
/// Threshold of the disk sublevel oracle.
pub const DISK_ALPHA: f64 = 0.1;
/// Lattice spacing of the unit disks in the sublevel oracle.
pub const DISK_SPACING: f64 = 1.0 / 512.0;
/// Knapp scale of the bilinear form oracle.
pub const KNAPP_FIXTURE_EPS: f64 = 0.0625;
/// Seed of the box pair drawn for the three-fold form oracle.
pub const TTT_PAIR_SEED: u64 = 2024;

/// Area of the strip `|x_2| ≤ w` inside `r1 ≤ |x| < r2`, sampled from `[−r2, r2]²`.
pub fn strip_mc(r1: f64, r2: f64, w: f64, cfg: &McConfig) -> Result<Estimate> {
    let est = mc_mean(
        cfg,
        || (),
        |rng, _| {
            let x: f64 = rng.gen_range(-r2..r2);
            let y: f64 = rng.gen_range(-r2..r2);
            let n2 = x * x + y * y;
            if y.abs() <= w && n2 >= r1 * r1 && n2 < r2 * r2 {
                1.0
            } else {
                0.0
            }
        },
    )?;
    Ok(est.scale(4.0 * r2 * r2))
}

pub fn unit_disk() -> Result<LatticeSet> {
    LatticeSet::ball(&[0.0, 0.0], 1.0, DISK_SPACING)
}

fn strip_oracle(cfg: &McConfig) -> Result<Estimate> {
    let (r1, r2, w) = STRIP_PARAMS;
    strip_mc(r1, r2, w, cfg)
}

fn disk_oracle(cfg: &McConfig) -> Result<Estimate> {
    let d = unit_disk()?;
    mc_sublevel(det2, DISK_ALPHA, &d, &d, cfg)
}

fn marc_max_oracle(_: &McConfig) -> Result<Estimate> {
    Ok(Estimate::exact(marc_explicit_constant(&MarcParams::maximal(1.0))?))
}

fn marc_harm_oracle(_: &McConfig) -> Result<Estimate> {
    Ok(Estimate::exact(marc_explicit_constant(&MarcParams::harmonic(1.0))?))
}

fn shell_oracle(_: &McConfig) -> Result<Estimate> {
    Ok(Estimate::exact(weighted_mass_sup_3d()))
}

fn knapp_oracle(cfg: &McConfig) -> Result<Estimate> {
    let op = AveragingOperator::for_model(&Model::MaximalR5)?;
    knapp_form(&op, &knapp_sets(&op, KNAPP_FIXTURE_EPS)?, cfg)
}

/// The pair behind the `ttt_r5_pair` fixture, with its refinement.
pub fn ttt_fixture_pair() -> Result<(AveragingOperator, crate::ttt::SetPair, crate::ttt::RefinedPair)> {
    let op = AveragingOperator::for_model(&Model::MaximalR5)?;
    let pair = random_box_union_pair(&op, &mut ChaCha8Rng::seed_from_u64(TTT_PAIR_SEED))?;
    let refined = refine(&op, &pair.f, &pair.g)?;
    Ok((op, pair, refined))
}

fn ttt_oracle(cfg: &McConfig) -> Result<Estimate> {
    let (op, pair, refined) = ttt_fixture_pair()?;
    ttt_form(&op, &pair.f, &pair.g, &refined.f, &refined.g, cfg)
}

pub const ORACLES: [Oracle; 7] = [
    Oracle { name: "strip_v_star", run_samples: 1_000_000, seed: 11, compute: strip_oracle },
    Oracle { name: "sublevel_w_star", run_samples: 10_000_000, seed: 12, compute: disk_oracle },
    Oracle { name: "marc_c_max", run_samples: 0, seed: 0, compute: marc_max_oracle },
    Oracle { name: "marc_c_harm", run_samples: 0, seed: 0, compute: marc_harm_oracle },
    Oracle { name: "shell_ratio_sup", run_samples: 0, seed: 0, compute: shell_oracle },
    Oracle { name: "knapp_b_r5_eps4", run_samples: 1_000_000, seed: 13, compute: knapp_oracle },
    Oracle { name: "ttt_r5_pair", run_samples: 1_000_000, seed: 14, compute: ttt_oracle },
];

pub fn oracle(name: &str) -> Option<&'static Oracle> {
    ORACLES.iter().find(|o| o.name == name)
}
