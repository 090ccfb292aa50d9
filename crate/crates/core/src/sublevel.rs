//! Sublevel-set measures: dyadic annulus masses, strip/annulus areas and the
//! Monte Carlo bilinear sublevel functional.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::LatticeSet;
use crate::marc::DyadicSeq;
use crate::mc::{mc_mean, Estimate, McConfig};

/// Constant in `W_{ij} ≤ C α min{2^{i−j}|E^r ∩ A_j|, 2^{j−i}|E^l ∩ A_i|}` for
/// `Φ = |det(u, v)|`: a strip of half-width `α/|v| ≤ 2^{1−j} α` meets the disk
/// of radius `2^i` in area at most `4 · 2^{1−j} α · 2^i`.
pub const MAXQ1_CONSTANT: f64 = 8.0;

/// Constant in `W_α(χ_{E^l}, χ_{E^r}) ≤ C α |E^l|^{1/2} |E^r|^{1/2}` for
/// `Φ = |det(u, v)|`: the per-annulus constant times the interpolation constant 4.
pub const SUBLEV01_CONSTANT: f64 = 32.0;

/// `i` with `2^{i−1} ≤ r < 2^i`; `None` at the origin.
pub fn annulus_index(r: f64) -> Option<i32> {
    if r <= 0.0 || !r.is_finite() {
        return None;
    }
    let mut i = r.log2().floor() as i32 + 1;
    // guard the floor against rounding at exact powers of two
    if r < 2f64.powi(i - 1) {
        i -= 1;
    } else if r >= 2f64.powi(i) {
        i += 1;
    }
    Some(i)
}

/// Index window `[i_min, i_max]` of dyadic annuli `A_i = {2^{i−1} ≤ |x| < 2^i}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnnulusDecomp {
    pub dim: usize,
    pub i_min: i32,
    pub i_max: i32,
}

impl AnnulusDecomp {
    pub fn contains(&self, i: i32, x: &[f64]) -> bool {
        annulus_index(norm(x)) == Some(i)
    }

    /// Lebesgue measure of `A_i` in `R^dim`.
    pub fn annulus_volume(&self, i: i32) -> f64 {
        ball_volume(self.dim, 2f64.powi(i)) - ball_volume(self.dim, 2f64.powi(i - 1))
    }

    pub fn indices(&self) -> impl Iterator<Item = i32> {
        self.i_min..=self.i_max
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Volume of the Euclidean ball of radius `r` in `R^dim`.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    let d = dim as f64;
    PI.powf(d / 2.0) / gamma_half_int(dim + 2) * r.powf(d)
}

/// `Γ(m/2)` for a positive integer `m`.
fn gamma_half_int(m: usize) -> f64 {
    if m == 1 {
        return PI.sqrt();
    }
    if m == 2 {
        return 1.0;
    }
    (m as f64 / 2.0 - 1.0) * gamma_half_int(m - 2)
}

/// `i ↦ |E ∩ A_i|`. Cells inside one annulus count whole; cells meeting a
/// shell boundary (or the origin) are split by `4^dim` subsamples.
pub fn annulus_masses(e: &LatticeSet) -> Result<DyadicSeq> {
    let mut out = DyadicSeq::new();
    let h = e.spacing();
    let vol = e.cell_volume();
    let dim = e.dim();
    let sub = 4usize.pow(dim as u32);
    let mut x = vec![0.0; dim];
    for c in e.cells()? {
        let lo: Vec<f64> = c.iter().zip(e.origin()).map(|(v, o)| o + *v as f64 * h).collect();
        // nearest and farthest points of the cell from the origin
        let near = lo.iter().map(|l| if *l > 0.0 { *l } else if l + h < 0.0 { -(l + h) } else { 0.0 });
        let rmin = near.map(|v| v * v).sum::<f64>().sqrt();
        let rmax = lo.iter().map(|l| l.abs().max((l + h).abs()).powi(2)).sum::<f64>().sqrt();
        match (annulus_index(rmin), annulus_index(rmax * (1.0 - 1e-15))) {
            (Some(a), Some(b)) if a == b => out.add(a, vol),
            _ => {
                let w = vol / sub as f64;
                for s in 0..sub {
                    let mut r = s;
                    for k in 0..dim {
                        x[k] = lo[k] + ((r % 4) as f64 + 0.5) * h / 4.0;
                        r /= 4;
                    }
                    if let Some(i) = annulus_index(norm(&x)) {
                        out.add(i, w);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Area of `{x ∈ R² : |x·n^⊥| ≤ w, |x| < r}`.
pub fn strip_disk_area(r: f64, w: f64) -> f64 {
    if w >= r {
        PI * r * r
    } else {
        2.0 * (w * (r * r - w * w).sqrt() + r * r * (w / r).asin())
    }
}

/// Area of the strip of half-width `w` inside the annulus `r1 ≤ |x| < r2`.
pub fn strip_annulus_measure(r1: f64, r2: f64, w: f64) -> Result<f64> {
    if !(0.0 <= r1 && r1 < r2) {
        return Err(Error::InvalidArgument(format!("need 0 <= r1 < r2, got ({r1}, {r2})")));
    }
    if w < 0.0 {
        return Err(Error::InvalidArgument(format!("half-width {w} is negative")));
    }
    Ok(strip_disk_area(r2, w) - strip_disk_area(r1, w))
}

/// Monte Carlo estimate of `∫∫ χ{Φ(u, v) ≤ α} χ_{E^l}(u) χ_{E^r}(v) du dv`.
///
/// Points are drawn uniformly from the two sets themselves and the hit rate is
/// scaled by `|E^l| |E^r|`, which is unbiased and never wastes samples outside
/// the sets.
pub fn mc_sublevel(
    phi: impl Fn(&[f64], &[f64]) -> f64 + Sync,
    alpha: f64,
    e_l: &LatticeSet,
    e_r: &LatticeSet,
    cfg: &McConfig,
) -> Result<Estimate> {
    if cfg.samples < 1000 {
        return Err(Error::InvalidArgument(format!("need at least 1000 samples, got {}", cfg.samples)));
    }
    let (ml, mr) = (e_l.measure(), e_r.measure());
    if ml == 0.0 || mr == 0.0 {
        return Err(Error::EmptySet);
    }
    let (dl, dr) = (e_l.dim(), e_r.dim());
    let est = mc_mean(
        cfg,
        || (vec![0.0; dl], vec![0.0; dr]),
        |rng, (u, v)| {
            e_l.sample(rng, u).expect("nonempty");
            e_r.sample(rng, v).expect("nonempty");
            if phi(u, v) <= alpha {
                1.0
            } else {
                0.0
            }
        },
    )?;
    Ok(est.scale(ml * mr))
}

/// `|det(u, v)|` for `u, v ∈ R²`.
pub fn det2(u: &[f64], v: &[f64]) -> f64 {
    (u[0] * v[1] - u[1] * v[0]).abs()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedMass {
    /// `(Σ_i 2^{−i} |E ∩ A_i|)^{1/2}`.
    pub lhs: f64,
    /// `|E|^{1/3}`.
    pub rhs: f64,
    /// `lhs / rhs`, and 0 for the empty set.
    pub ratio: f64,
}

pub fn weighted_mass_bound_3d(e: &LatticeSet) -> Result<WeightedMass> {
    if e.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: e.dim() });
    }
    let masses = annulus_masses(e)?;
    Ok(weighted_mass_from_masses(&masses))
}

pub fn weighted_mass_from_masses(masses: &DyadicSeq) -> WeightedMass {
    let lhs = masses.iter().map(|(i, m)| 2f64.powi(-i) * m).sum::<f64>().sqrt();
    let rhs = masses.l1().cbrt();
    WeightedMass { lhs, rhs, ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 } }
}

/// `Σ_i 2^{−i} |B_R ∩ A_i|` in `R³`, exactly: the full shells below the top one
/// sum to `(4π/3)(7/8) Σ_{i<top} 4^i`.
pub fn ball_weighted_mass_3d(radius: f64) -> f64 {
    let Some(top) = annulus_index(radius) else {
        return 0.0;
    };
    let full = (4.0 * PI / 3.0) * (7.0 / 8.0) * 4f64.powi(top - 1) * (4.0 / 3.0);
    let partial = 2f64.powi(-top) * (ball_volume(3, radius) - ball_volume(3, 2f64.powi(top - 1)));
    full + partial
}

/// `sup_E (Σ_i 2^{−i}|E ∩ A_i|)^{1/2} / |E|^{1/3}` over sets in `R³`. The weight
/// `2^{−i(x)}` is radially decreasing, so balls are extremal; the ratio is
/// invariant under `R ↦ 2R`, and one octave of radii is scanned.
pub fn weighted_mass_sup_3d() -> f64 {
    let mut best: f64 = 0.0;
    for k in 0..=65536 {
        let r = 1.0 + k as f64 / 65536.0;
        let w = weighted_mass_from_ball(r);
        best = best.max(w);
    }
    best
}

fn weighted_mass_from_ball(r: f64) -> f64 {
    ball_weighted_mass_3d(r).sqrt() / ball_volume(3, r).cbrt()
}
