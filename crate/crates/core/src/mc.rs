//! Seeded block Monte Carlo.
//!
//! Samples are grouped into fixed-size blocks. Block `b` draws from a ChaCha8
//! stream keyed by `(seed, b)`, and block sums are reduced in block order, so an
//! estimate depends only on `(seed, samples, block)` and never on the number of
//! worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BLOCK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    pub block: u64,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig { samples, seed, workers: 0, block: DEFAULT_BLOCK }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    /// Same budget, independent stream family.
    pub fn reseeded(mut self, salt: u64) -> Self {
        self.seed = self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(salt);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, stderr: 0.0, samples: 0 }
    }

    pub fn scale(self, c: f64) -> Self {
        Estimate { value: self.value * c, stderr: self.stderr * c.abs(), samples: self.samples }
    }
}

/// Rng for block `b` of a run keyed by `seed`.
pub fn block_rng(seed: u64, b: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b);
    rng
}

pub fn run_in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool").install(f)
}

/// Means and standard errors of `dim` jointly sampled quantities. `f` fills
/// `out` for one sample; `init` builds per-block scratch space.
pub fn mc_vector<T, I, F>(cfg: &McConfig, dim: usize, init: I, f: F) -> Result<Vec<Estimate>>
where
    I: Fn() -> T + Sync,
    F: Fn(&mut ChaCha8Rng, &mut T, &mut [f64]) + Sync,
{
    if cfg.samples < 2 || cfg.block == 0 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {}", cfg.samples)));
    }
    let nblocks = cfg.samples.div_ceil(cfg.block);
    let blocks: Vec<(Vec<f64>, Vec<f64>)> = run_in_pool(cfg.workers, || {
        (0..nblocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = block_rng(cfg.seed, b);
                let mut scratch = init();
                let mut out = vec![0.0; dim];
                let mut sum = vec![0.0; dim];
                let mut sq = vec![0.0; dim];
                let count = cfg.block.min(cfg.samples - b * cfg.block);
                for _ in 0..count {
                    out.iter_mut().for_each(|o| *o = 0.0);
                    f(&mut rng, &mut scratch, &mut out);
                    for k in 0..dim {
                        sum[k] += out[k];
                        sq[k] += out[k] * out[k];
                    }
                }
                (sum, sq)
            })
            .collect()
    });
    let n = cfg.samples as f64;
    Ok((0..dim)
        .map(|k| {
            let (mut s, mut s2) = (0.0, 0.0);
            for (sum, sq) in &blocks {
                s += sum[k];
                s2 += sq[k];
            }
            let mean = s / n;
            let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
            Estimate { value: mean, stderr: (var / n).sqrt(), samples: cfg.samples }
        })
        .collect())
}

/// Mean and standard error of a single sampled quantity.
pub fn mc_mean<T, I, F>(cfg: &McConfig, init: I, f: F) -> Result<Estimate>
where
    I: Fn() -> T + Sync,
    F: Fn(&mut ChaCha8Rng, &mut T) -> f64 + Sync,
{
    Ok(mc_vector(cfg, 1, init, |rng, s, out| out[0] = f(rng, s))?[0])
}
