//! Knapp families: a small ball `F_ε` in the left space, the tube `G_ε` around
//! the dual surface in the right space, and the scaling of `|F_ε|`, `|G_ε|` and
//! `B = ∫_{G_ε} T χ_{F_ε}` as `ε → 0`.
//!
//! `G_ε` is the set of `x_R` within `1.05 ε` of some point `π_R(m)` with
//! `π_L(m) = 0` and left fiber parameter `r` on the grid of spacing `ε/4` over
//! `U = [−1/2, 1/2]^k`. It is held implicitly: membership scans only the grid
//! window around the parameter read off from `x_R`, and `|G_ε|` is estimated
//! as a union of balls.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeSet;
use crate::mc::{mc_mean, Estimate, McConfig};
use crate::models::Model;
use crate::operator::{AveragingOperator, Indicator, Kernel};
use crate::poly::CompiledPoly;
use crate::sublevel::ball_volume;
use crate::triangle::{admissible_region, DimensionTriple, RationalPoint};
use crate::Rational;

/// Tube radius factor over `ε`.
pub const TUBE_TOLERANCE: f64 = 1.05;
/// Grid spacing of the surface parameter over `ε`.
pub const GRID_FACTOR: f64 = 0.25;
/// Lattice spacing of `F_ε` over `ε`.
pub const LATTICE_FACTOR: f64 = 0.125;
/// Half-width of the parameter subdomain `U`.
pub const U_HALF: f64 = 0.5;
/// Largest parameter grid the tube will scan.
pub const MAX_GRID_POINTS: f64 = 1e12;

#[derive(Clone, Debug)]
enum Surface {
    /// `Σ = {−γ(r)}`; `rest[m]` is the quadratic part `q_m`.
    Convolution { k: usize, rest: Vec<CompiledPoly> },
    /// `Σ = {(r, 0)}` in `(x, z)` coordinates.
    Bilinear { d_l: usize },
}

/// The tube `G_ε`.
#[derive(Clone, Debug)]
pub struct Tube {
    surface: Surface,
    eps: f64,
    radius: f64,
    step: f64,
    /// Grid nodes per axis of `U`.
    nodes: i64,
    dim: usize,
}

impl Tube {
    pub fn new(op: &AveragingOperator, eps: f64) -> Result<Tube> {
        let surface = match op.kernel() {
            Kernel::Convolution { gamma, .. } => {
                let k = op.right_region().dim();
                for (i, g) in gamma.iter().enumerate().take(k) {
                    let mut e = vec![0.0; k];
                    e[i] = 1.0;
                    let mut e2 = e.clone();
                    e2[i] = 2.0;
                    if (g.eval(&e) - 1.0).abs() > 1e-12 || (g.eval(&e2) - 2.0).abs() > 1e-12 {
                        return Err(Error::Unsupported {
                            model: op.label().to_string(),
                            what: "tube around a surface without graph form".into(),
                        });
                    }
                }
                let rest: Vec<CompiledPoly> = gamma[k..].to_vec();
                Surface::Convolution { k, rest }
            }
            Kernel::Bilinear { q } => Surface::Bilinear { d_l: q.d_l() },
            Kernel::Product { .. } => {
                return Err(Error::Unsupported { model: op.label().to_string(), what: "Knapp tube".into() })
            }
        };
        let step = GRID_FACTOR * eps;
        let nodes = (2.0 * U_HALF / step).round() as i64 + 1;
        let k = match &surface {
            Surface::Convolution { k, .. } => *k,
            Surface::Bilinear { d_l, .. } => *d_l,
        };
        if k > 8 || op.right_dim() > 16 {
            return Err(Error::Unsupported { model: op.label().to_string(), what: "Knapp tube above 8 parameters or 16 dimensions".into() });
        }
        if (nodes as f64).powi(k as i32) > MAX_GRID_POINTS {
            return Err(Error::MemoryGuard(format!("parameter grid of {nodes}^{k} points")));
        }
        Ok(Tube { surface, eps, radius: TUBE_TOLERANCE * eps, step, nodes, dim: op.right_dim() })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Surface parameter dimension.
    pub fn param_dim(&self) -> usize {
        match &self.surface {
            Surface::Convolution { k, .. } => *k,
            Surface::Bilinear { d_l, .. } => *d_l,
        }
    }

    /// Normal dimension `ℓ`.
    pub fn codim(&self) -> usize {
        self.dim - self.param_dim()
    }

    fn node(&self, i: i64) -> f64 {
        -U_HALF + i as f64 * self.step
    }

    /// Parameter read off the first coordinates of `x`.
    fn guess(&self, x: &[f64], i: usize) -> f64 {
        match &self.surface {
            Surface::Convolution { .. } => -x[i],
            Surface::Bilinear { .. } => x[i],
        }
    }

    /// Squared distance from `x` to the surface point at parameter `r`, abandoning
    /// once it exceeds `bound`.
    #[inline]
    fn dist2_capped(&self, x: &[f64], r: &[f64], bound: f64) -> f64 {
        let k = r.len();
        let mut d = 0.0;
        for i in 0..k {
            let v = x[i] - self.guess_inverse(r[i]);
            d += v * v;
        }
        if d > bound {
            return d;
        }
        match &self.surface {
            Surface::Convolution { rest, .. } => {
                for (m, q) in rest.iter().enumerate() {
                    let v = x[k + m] + q.eval(r);
                    d += v * v;
                    if d > bound {
                        return d;
                    }
                }
            }
            Surface::Bilinear { .. } => {
                for v in &x[k..] {
                    d += v * v;
                }
            }
        }
        d
    }

    #[inline]
    fn guess_inverse(&self, r: f64) -> f64 {
        match &self.surface {
            Surface::Convolution { .. } => -r,
            Surface::Bilinear { .. } => r,
        }
    }

    /// Grid minimum test with the window and partial-sum pruning.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        let k = self.param_dim();
        let r2 = self.radius * self.radius;
        let mut lo = [0i64; 8];
        let mut hi = [0i64; 8];
        let mut near = [0i64; 8];
        for i in 0..k {
            let g = self.guess(x, i);
            let a = ((g - self.radius + U_HALF) / self.step).ceil() as i64;
            let b = ((g + self.radius + U_HALF) / self.step).floor() as i64;
            lo[i] = a.max(0);
            hi[i] = b.min(self.nodes - 1);
            if lo[i] > hi[i] {
                return false;
            }
            near[i] = (((g + U_HALF) / self.step).round() as i64).clamp(lo[i], hi[i]);
        }
        let mut r = [0.0f64; 8];
        for i in 0..k {
            r[i] = self.node(near[i]);
        }
        if self.dist2_capped(x, &r[..k], r2) <= r2 {
            return true;
        }
        // odometer over the window, pruning on the leading coordinates
        let mut idx = [0i64; 8];
        idx[..k].copy_from_slice(&lo[..k]);
        loop {
            let mut partial = 0.0;
            let mut ok = true;
            for i in 0..k {
                r[i] = self.node(idx[i]);
                let v = x[i] - self.guess_inverse(r[i]);
                partial += v * v;
                if partial > r2 {
                    ok = false;
                    break;
                }
            }
            if ok && self.dist2_capped(x, &r[..k], r2) <= r2 {
                return true;
            }
            let mut i = 0;
            loop {
                if i == k {
                    return false;
                }
                idx[i] += 1;
                if idx[i] <= hi[i] {
                    break;
                }
                idx[i] = lo[i];
                i += 1;
            }
        }
    }

    /// Number of grid balls that cover `x`.
    pub fn coverage(&self, x: &[f64]) -> usize {
        let k = self.param_dim();
        let r2 = self.radius * self.radius;
        let mut lo = [0i64; 8];
        let mut hi = [0i64; 8];
        for i in 0..k {
            let g = self.guess(x, i);
            lo[i] = (((g - self.radius + U_HALF) / self.step).ceil() as i64).max(0);
            hi[i] = (((g + self.radius + U_HALF) / self.step).floor() as i64).min(self.nodes - 1);
            if lo[i] > hi[i] {
                return 0;
            }
        }
        let mut r = [0.0f64; 8];
        let mut idx = [0i64; 8];
        idx[..k].copy_from_slice(&lo[..k]);
        let mut count = 0;
        loop {
            for i in 0..k {
                r[i] = self.node(idx[i]);
            }
            if self.dist2_capped(x, &r[..k], r2) <= r2 {
                count += 1;
            }
            let mut i = 0;
            loop {
                if i == k {
                    return count;
                }
                idx[i] += 1;
                if idx[i] <= hi[i] {
                    break;
                }
                idx[i] = lo[i];
                i += 1;
            }
        }
    }

    /// Surface point at parameter `r`.
    fn surface_point(&self, r: &[f64], out: &mut [f64]) {
        let k = r.len();
        for i in 0..k {
            out[i] = self.guess_inverse(r[i]);
        }
        match &self.surface {
            Surface::Convolution { rest, .. } => {
                for (m, q) in rest.iter().enumerate() {
                    out[k + m] = -q.eval(r);
                }
            }
            Surface::Bilinear { .. } => out[k..].iter_mut().for_each(|v| *v = 0.0),
        }
    }

    /// `|G_ε|` as a union of equal balls: `|G| = N |B| E[1/c(x)]` with `x`
    /// uniform in a uniformly chosen ball and `c(x)` its coverage.
    pub fn measure(&self, cfg: &McConfig) -> Result<Estimate> {
        let k = self.param_dim();
        let dim = self.dim;
        let balls = (self.nodes as f64).powi(k as i32);
        let scale = balls * ball_volume(dim, self.radius);
        mc_mean(
            cfg,
            || (vec![0.0; k], vec![0.0; dim]),
            |rng, (r, x)| {
                for v in r.iter_mut() {
                    *v = self.node(rng.gen_range(0..self.nodes));
                }
                self.surface_point(r, x);
                let mut dir = [0.0f64; 16];
                let mut n2 = 0.0;
                for d in dir.iter_mut().take(dim) {
                    *d = rng.sample::<f64, _>(StandardNormal);
                    n2 += *d * *d;
                }
                let rad = self.radius * rng.gen::<f64>().powf(1.0 / dim as f64) / n2.sqrt();
                for (xi, d) in x.iter_mut().zip(&dir) {
                    *xi += rad * d;
                }
                // the center ball always covers x
                1.0 / self.coverage(x).max(1) as f64
            },
        )
        .map(|e| e.scale(scale))
    }
}

impl Indicator for Tube {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.contains_point(x)
    }
}

#[derive(Clone, Debug)]
pub struct KnappSets {
    pub f: LatticeSet,
    pub g: Tube,
}

pub fn knapp_sets(op: &AveragingOperator, eps: f64) -> Result<KnappSets> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::InvalidArgument(format!("Knapp scale must lie in (0, 1/4], got {eps}")));
    }
    let f = LatticeSet::ball(&vec![0.0; op.left_dim()], eps, LATTICE_FACTOR * eps)?;
    let g = Tube::new(op, eps)?;
    Ok(KnappSets { f, g })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnappPoint {
    pub eps: f64,
    pub meas_f: f64,
    pub meas_g: Estimate,
    pub b: Estimate,
}

/// `B = ∫_{F_ε} T* χ_{G_ε}`, sampling `x_L ∈ F_ε` and a left fiber parameter.
pub fn knapp_form(op: &AveragingOperator, sets: &KnappSets, cfg: &McConfig) -> Result<Estimate> {
    crate::ttt::bilinear_form_adjoint(op, &sets.f, &sets.g, cfg)
}

/// One row of the sweep, with `B` and `|G_ε|` on independent streams.
pub fn knapp_point(op: &AveragingOperator, eps: f64, cfg: &McConfig) -> Result<KnappPoint> {
    let sets = knapp_sets(op, eps)?;
    let salt = eps.to_bits();
    let b = knapp_form(op, &sets, &cfg.reseeded(salt))?;
    let meas_g = sets.g.measure(&cfg.reseeded(salt ^ 0x5a5a))?;
    Ok(KnappPoint { eps, meas_f: sets.f.measure(), meas_g, b })
}

pub fn knapp_sweep(op: &AveragingOperator, eps: &[f64], cfg: &McConfig) -> Result<Vec<KnappPoint>> {
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("Knapp scales must be strictly decreasing".into()));
    }
    eps.iter().map(|&e| knapp_point(op, e, cfg)).collect()
}

/// Default scales `2^{-3} … 2^{-7}` (`2^{-6}` for the four-parameter model).
pub fn default_eps(model: &Model) -> Vec<f64> {
    let last = if model.param_dim() >= 4 && model.is_convolution() { 6 } else { 7 };
    (3..=last).map(|j| 2f64.powi(-j)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares slope of `log2(value)` against `log2(x)`, from at least four
/// points.
pub fn slope_fit(xs: &[f64], values: &[f64]) -> Result<SlopeFit> {
    if xs.len() < 4 {
        return Err(Error::InvalidArgument(format!("slope fit needs at least four points, got {}", xs.len())));
    }
    log_log_fit(xs, values)
}

/// [`slope_fit`] without the minimum point count.
pub fn log_log_fit(xs: &[f64], values: &[f64]) -> Result<SlopeFit> {
    if xs.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: values.len() });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("a line needs two points".into()));
    }
    if xs.iter().chain(values).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("slope fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.log2()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.log2()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("slope fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(SlopeFit { slope, intercept: my - slope * mx, r2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSlopes {
    pub meas_f: SlopeFit,
    pub meas_g: SlopeFit,
    pub b: SlopeFit,
}

pub fn scaling_slopes(points: &[KnappPoint]) -> Result<ScalingSlopes> {
    let eps: Vec<f64> = points.iter().map(|p| p.eps).collect();
    Ok(ScalingSlopes {
        meas_f: slope_fit(&eps, &points.iter().map(|p| p.meas_f).collect::<Vec<_>>())?,
        meas_g: slope_fit(&eps, &points.iter().map(|p| p.meas_g.value).collect::<Vec<_>>())?,
        b: slope_fit(&eps, &points.iter().map(|p| p.b.value).collect::<Vec<_>>())?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Boundary,
    Violated,
}

pub const VIOLATED_BELOW: f64 = -0.1;
pub const BOUNDARY_WITHIN: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessReport {
    pub verdict: Verdict,
    /// Fitted slope of `B / (|F|^{1/q_L} |G|^{1/q_R})` against `ε`.
    pub ratio_slope: f64,
    /// `n_L − n_L/q_L − ℓ/q_R`, exact.
    pub predicted_slope: String,
    /// Slack of the left and right Knapp constraints at the point, exact.
    pub knapp_left_slack: String,
    pub knapp_right_slack: String,
}

/// Restricted weak-type ratios along the sweep.
pub fn rwt_ratios(points: &[KnappPoint], inv_q_l: f64, inv_q_r: f64) -> Vec<f64> {
    points.iter().map(|p| p.b.value / (p.meas_f.powf(inv_q_l) * p.meas_g.value.powf(inv_q_r))).collect()
}

/// Growth of the ratio as `ε → 0` (negative fitted slope) beyond
/// [`VIOLATED_BELOW`] rules out the bound; a slope within [`BOUNDARY_WITHIN`]
/// of zero is reported as boundary.
pub fn sharpness_verdict(d: DimensionTriple, point: RationalPoint, points: &[KnappPoint]) -> Result<SharpnessReport> {
    let (x, y) = point.to_f64();
    let ratios = rwt_ratios(points, x, y);
    let eps: Vec<f64> = points.iter().map(|p| p.eps).collect();
    let fit = slope_fit(&eps, &ratios)?;
    let verdict = if fit.slope < VIOLATED_BELOW {
        Verdict::Violated
    } else if fit.slope.abs() <= BOUNDARY_WITHIN {
        Verdict::Boundary
    } else {
        Verdict::Consistent
    };
    let nl = Rational::from_integer(d.n_l() as i64);
    let l = Rational::from_integer(d.ell() as i64);
    let region = admissible_region(d)?;
    Ok(SharpnessReport {
        verdict,
        ratio_slope: fit.slope,
        predicted_slope: (nl - nl * point.x - l * point.y).to_string(),
        knapp_left_slack: region.knapp_left.slack(point).to_string(),
        knapp_right_slack: region.knapp_right.slack(point).to_string(),
    })
}
