//! The model surfaces and the generic bilinear model, addressable by string id.
//!
//! Convolution models average `f(x + γ(t))` over a parameter region. Surfaces use
//! the integer normalization, e.g. `γ_M(t) = (t1, t2, t1², 2t1t2, t2²)`. Frames and
//! incidence points use the halved quadratic part, `(t1, t2, t1²/2, t1t2, t2²/2)`,
//! so that `X_L^i = ∂_{t_i} − Σ_m ∂_iγ_m ∂_{x_m}` has unit-size brackets. The two
//! differ by the invertible output map `diag(1, …, 1, 2, …, 2)`.
//!
//! The asymmetric model `Tf(y, t) = ∫_{[-1,1]^n} f(x, y + t x) dx` is the bilinear
//! model with `Q(t, x) = t x` (`d_L = 1`, `d_R = ℓ = n`): on `M = {(t, x, y)}`,
//! `π_L = (x, y + t x)`, `π_R = (t, y)`, `X_L = ∂_t − Σ_j x_j ∂_{y_j}` and
//! `X_R^j = ∂_{x_j}`.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{combinations, det, wedge_volume};
use crate::poly::MultiPoly;
use crate::scalar::Scalar;
use crate::triangle::{DimensionTriple, Ext, SublevelExponents};
use crate::Rational;

/// A bilinear map `Q : R^{d_L} × R^{d_R} → R^ℓ` with coefficients `Q[i][j][m]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticModel {
    d_l: usize,
    d_r: usize,
    ell: usize,
    coeffs: Vec<f64>,
}

impl QuadraticModel {
    /// `tensor[i][j][m]` is the coefficient of `x_i y_j` in component `m`.
    pub fn new(tensor: &[Vec<Vec<f64>>]) -> Result<Self> {
        let d_l = tensor.len();
        let d_r = tensor.first().map_or(0, |t| t.len());
        let ell = tensor.first().and_then(|t| t.first()).map_or(0, |t| t.len());
        if d_l == 0 || d_r == 0 || ell == 0 {
            return Err(Error::InvalidDimensions("bilinear tensor must be nonempty in every index".into()));
        }
        if d_l + d_r < ell {
            return Err(Error::InvalidDimensions(format!("d_L + d_R = {} < ell = {ell}", d_l + d_r)));
        }
        let mut coeffs = Vec::with_capacity(d_l * d_r * ell);
        for row in tensor {
            check_dim(d_r, row.len())?;
            for col in row {
                check_dim(ell, col.len())?;
                if col.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidArgument("bilinear tensor entries must be finite".into()));
                }
                coeffs.extend_from_slice(col);
            }
        }
        Ok(QuadraticModel { d_l, d_r, ell, coeffs })
    }

    /// Parses the nested-array form used in `bilinear:<json>` ids.
    pub fn from_json(text: &str) -> Result<Self> {
        let tensor: Vec<Vec<Vec<f64>>> =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("bilinear tensor: {e}")))?;
        Self::new(&tensor)
    }

    pub fn to_json(&self) -> String {
        let t: Vec<Vec<Vec<f64>>> = (0..self.d_l)
            .map(|i| (0..self.d_r).map(|j| (0..self.ell).map(|m| self.coeff(i, j, m)).collect()).collect())
            .collect();
        serde_json::to_string(&t).expect("tensor serializes")
    }

    /// `Q(t, x) = t x` on `R × R^{d_R} → R^{d_R}`.
    pub fn asymmetric(d_r: usize) -> Self {
        let tensor = vec![(0..d_r).map(|j| (0..d_r).map(|m| if j == m { 1.0 } else { 0.0 }).collect()).collect()];
        Self::new(&tensor).expect("asymmetric tensor is well formed")
    }

    pub fn d_l(&self) -> usize {
        self.d_l
    }

    pub fn d_r(&self) -> usize {
        self.d_r
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn coeff(&self, i: usize, j: usize, m: usize) -> f64 {
        self.coeffs[(i * self.d_r + j) * self.ell + m]
    }

    pub fn dims(&self) -> DimensionTriple {
        DimensionTriple::new(self.d_r + self.ell, self.d_l + self.ell, self.ell)
            .expect("bilinear dimensions always satisfy the triple invariants")
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ell];
        for i in 0..self.d_l {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.d_r {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                for (m, o) in out.iter_mut().enumerate() {
                    *o += self.coeff(i, j, m) * xy;
                }
            }
        }
        out
    }

    /// `Q(x, y)` over any scalar; coefficients converted exactly when dyadic.
    pub fn eval_scalar<S: Scalar>(&self, x: &[S], y: &[S]) -> Vec<S> {
        (0..self.ell)
            .map(|m| {
                let mut acc = S::zero();
                for i in 0..self.d_l {
                    for j in 0..self.d_r {
                        let c = self.coeff(i, j, m);
                        if c != 0.0 {
                            acc = acc + S::from_real(c) * x[i].clone() * y[j].clone();
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// `{Q(e_i, y)}_{i < d_L}`.
    pub fn left_vectors(&self, y: &[f64]) -> Vec<Vec<f64>> {
        (0..self.d_l).map(|i| self.eval(&unit(self.d_l, i), y)).collect()
    }

    /// `{Q(x, e_j)}_{j < d_R}`.
    pub fn right_vectors(&self, x: &[f64]) -> Vec<Vec<f64>> {
        (0..self.d_r).map(|j| self.eval(x, &unit(self.d_r, j))).collect()
    }

    /// Bound `β` with `|Q(x, y)| ≤ β |x| |y|` (Frobenius norm of the tensor).
    pub fn norm_bound(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Largest `ℓ`-volume spanned by `{Q(e_i, y)} ∪ {Q(x, e_j)}`.
    pub fn vol_q(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.d_l, x.len())?;
        check_dim(self.d_r, y.len())?;
        let mut all = self.left_vectors(y);
        all.extend(self.right_vectors(x));
        let mut best: f64 = 0.0;
        for subset in combinations(all.len(), self.ell) {
            let vs: Vec<Vec<f64>> = subset.iter().map(|&k| all[k].clone()).collect();
            best = best.max(wedge_volume(&vs)?);
        }
        Ok(best)
    }

    /// `Vol_Q(x, y) / (|x|² + |y|²)^{(d_L + d_R − ℓ)/2}`.
    pub fn phi_q(&self, x: &[f64], y: &[f64]) -> Result<PhiQ> {
        let r2: f64 = x.iter().chain(y).map(|v| v * v).sum();
        if r2 == 0.0 {
            check_dim(self.d_l, x.len())?;
            check_dim(self.d_r, y.len())?;
            return Ok(PhiQ { value: 0.0, degenerate: true });
        }
        let kappa = (self.d_l + self.d_r - self.ell) as f64;
        Ok(PhiQ { value: self.vol_q(x, y)? / r2.powf(kappa / 2.0), degenerate: false })
    }

    /// Root-sum-of-squares of the `ℓ × ℓ` minors built from `Q(a, e_j)` and
    /// `Q(e_i, b)`: the curvature weight at left offset `a` and right offset `b`.
    pub fn k_from_offsets(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut cols = self.right_vectors(a);
        cols.extend(self.left_vectors(b));
        combinations(cols.len(), self.ell)
            .into_iter()
            .map(|s| {
                let m: Vec<Vec<f64>> = (0..self.ell).map(|r| s.iter().map(|&c| cols[c][r]).collect()).collect();
                let d = det(&m);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiQ {
    pub value: f64,
    /// Set when `(x, y) = 0`, where the quotient is undefined and reported as 0.
    pub degenerate: bool,
}

pub(crate) fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Parameter region of a convolution model or the fiber box of a bilinear one.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamRegion {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{(z1, z2) ∈ C² : |z1| + |z2| ≤ 1}` realized in `R^4`.
    ComplexL1,
}

impl ParamRegion {
    pub fn cube(k: usize, lo: f64, hi: f64) -> Self {
        ParamRegion::Box { lo: vec![lo; k], hi: vec![hi; k] }
    }

    pub fn dim(&self) -> usize {
        match self {
            ParamRegion::Box { lo, .. } => lo.len(),
            ParamRegion::ComplexL1 => 4,
        }
    }

    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ParamRegion::Box { lo, hi } => (lo.clone(), hi.clone()),
            ParamRegion::ComplexL1 => (vec![-1.0; 4], vec![1.0; 4]),
        }
    }

    /// Lebesgue measure.
    pub fn volume(&self) -> f64 {
        match self {
            ParamRegion::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            ParamRegion::ComplexL1 => PI * PI / 6.0,
        }
    }

    pub fn contains(&self, t: &[f64]) -> bool {
        match self {
            ParamRegion::Box { lo, hi } => t.iter().zip(lo.iter().zip(hi)).all(|(x, (a, b))| *a <= *x && *x <= *b),
            ParamRegion::ComplexL1 => t[0].hypot(t[1]) + t[2].hypot(t[3]) <= 1.0,
        }
    }

    /// Uniform sample, by rejection from the bounding box when curved.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let (lo, hi) = self.bounds();
        loop {
            for (o, (a, b)) in out.iter_mut().zip(lo.iter().zip(&hi)) {
                *o = a + (b - a) * rng.gen::<f64>();
            }
            if self.contains(out) {
                return;
            }
        }
    }

    /// Tensor midpoint rule with `m` nodes per axis: `(nodes, weight per node)`.
    /// Nodes outside a curved region are dropped.
    pub fn midpoint_nodes(&self, m: usize) -> (Vec<Vec<f64>>, f64) {
        let (lo, hi) = self.bounds();
        let k = lo.len();
        let steps: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / m as f64).collect();
        let weight: f64 = steps.iter().product();
        let total = m.pow(k as u32);
        let mut nodes = Vec::with_capacity(total);
        let mut idx = vec![0usize; k];
        for _ in 0..total {
            let t: Vec<f64> = (0..k).map(|a| lo[a] + (idx[a] as f64 + 0.5) * steps[a]).collect();
            if self.contains(&t) {
                nodes.push(t);
            }
            for a in 0..k {
                idx[a] += 1;
                if idx[a] < m {
                    break;
                }
                idx[a] = 0;
            }
        }
        (nodes, weight)
    }
}

/// Result of evaluating a surface map.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaPoint {
    pub value: Vec<f64>,
    /// False when `t` lies outside the model's parameter region.
    pub in_region: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    MaximalR5,
    MaximalC5,
    HarmonicR8,
    Asymmetric { d_r: usize },
    Bilinear(QuadraticModel),
}

impl Model {
    /// Registry lookup: `maximal_r5`, `maximal_c5`, `harmonic_r8`,
    /// `asymmetric:<d_R>`, `bilinear:<json tensor>`.
    pub fn from_id(id: &str) -> Result<Model> {
        let id = id.trim();
        match id {
            "maximal_r5" => return Ok(Model::MaximalR5),
            "maximal_c5" => return Ok(Model::MaximalC5),
            "harmonic_r8" => return Ok(Model::HarmonicR8),
            _ => {}
        }
        if let Some(rest) = id.strip_prefix("asymmetric:") {
            let d_r: usize = rest.trim().parse().map_err(|_| Error::UnknownModel(id.to_string()))?;
            if d_r == 0 {
                return Err(Error::InvalidDimensions("asymmetric model needs d_R >= 1".into()));
            }
            return Ok(Model::Asymmetric { d_r });
        }
        if let Some(rest) = id.strip_prefix("bilinear:") {
            return Ok(Model::Bilinear(QuadraticModel::from_json(rest)?));
        }
        Err(Error::UnknownModel(id.to_string()))
    }

    pub fn id(&self) -> String {
        match self {
            Model::MaximalR5 => "maximal_r5".into(),
            Model::MaximalC5 => "maximal_c5".into(),
            Model::HarmonicR8 => "harmonic_r8".into(),
            Model::Asymmetric { d_r } => format!("asymmetric:{d_r}"),
            Model::Bilinear(q) => format!("bilinear:{}", q.to_json()),
        }
    }

    pub fn dims(&self) -> DimensionTriple {
        match self {
            Model::MaximalR5 => DimensionTriple::new(5, 5, 3).unwrap(),
            Model::MaximalC5 => DimensionTriple::new(10, 10, 6).unwrap(),
            Model::HarmonicR8 => DimensionTriple::new(8, 8, 5).unwrap(),
            Model::Asymmetric { d_r } => DimensionTriple::new(2 * d_r, d_r + 1, *d_r).unwrap(),
            Model::Bilinear(q) => q.dims(),
        }
    }

    /// `κ = d_L + d_R − ℓ`.
    pub fn kappa(&self) -> usize {
        self.dims().kappa()
    }

    pub fn is_convolution(&self) -> bool {
        matches!(self, Model::MaximalR5 | Model::MaximalC5 | Model::HarmonicR8)
    }

    /// The bilinear map for the asymmetric and generic bilinear models.
    pub fn quadratic(&self) -> Option<QuadraticModel> {
        match self {
            Model::Asymmetric { d_r } => Some(QuadraticModel::asymmetric(*d_r)),
            Model::Bilinear(q) => Some(q.clone()),
            _ => None,
        }
    }

    /// Parameter dimension `k` of a convolution model.
    pub fn param_dim(&self) -> usize {
        match self {
            Model::MaximalR5 => 2,
            Model::MaximalC5 => 4,
            Model::HarmonicR8 => 3,
            Model::Asymmetric { d_r } => *d_r,
            Model::Bilinear(q) => q.d_r(),
        }
    }

    /// Region integrated over by `T`: the `t` region of a convolution model,
    /// the `[-1,1]^{d_R}` fiber box of a bilinear one.
    pub fn param_region(&self) -> ParamRegion {
        match self {
            Model::MaximalC5 => ParamRegion::ComplexL1,
            m => ParamRegion::cube(m.param_dim(), -1.0, 1.0),
        }
    }

    /// Quadratic part of the surface map (integer normalization), in `k` variables.
    fn quadratic_part<S: Scalar>(&self) -> Result<Vec<MultiPoly<S>>> {
        let k = self.param_dim();
        let t = |c: i64, f: &[(usize, u32)]| MultiPoly::term(k, S::from_int(c), f);
        let sum = |a: MultiPoly<S>, b: MultiPoly<S>| &a + &b;
        Ok(match self {
            Model::MaximalR5 => vec![t(1, &[(0, 2)]), t(2, &[(0, 1), (1, 1)]), t(1, &[(1, 2)])],
            Model::MaximalC5 => vec![
                sum(t(1, &[(0, 2)]), t(-1, &[(1, 2)])),
                t(2, &[(0, 1), (1, 1)]),
                sum(t(2, &[(0, 1), (2, 1)]), t(-2, &[(1, 1), (3, 1)])),
                sum(t(2, &[(0, 1), (3, 1)]), t(2, &[(1, 1), (2, 1)])),
                sum(t(1, &[(2, 2)]), t(-1, &[(3, 2)])),
                t(2, &[(2, 1), (3, 1)]),
            ],
            Model::HarmonicR8 => vec![
                sum(t(1, &[(0, 2)]), t(-1, &[(1, 2)])),
                sum(t(1, &[(1, 2)]), t(-1, &[(2, 2)])),
                t(2, &[(0, 1), (1, 1)]),
                t(2, &[(1, 1), (2, 1)]),
                t(2, &[(0, 1), (2, 1)]),
            ],
            _ => {
                return Err(Error::Unsupported { model: self.id(), what: "surface map".into() });
            }
        })
    }

    /// Surface map `γ`, integer normalization.
    pub fn gamma<S: Scalar>(&self) -> Result<Vec<MultiPoly<S>>> {
        let k = self.param_dim();
        let mut g: Vec<MultiPoly<S>> = (0..k).map(|i| MultiPoly::var(k, i)).collect();
        g.extend(self.quadratic_part()?);
        Ok(g)
    }

    /// Surface map with halved quadratic part, used for frames and incidence points.
    pub fn frame_gamma<S: Scalar>(&self) -> Result<Vec<MultiPoly<S>>> {
        let k = self.param_dim();
        let mut g: Vec<MultiPoly<S>> = (0..k).map(|i| MultiPoly::var(k, i)).collect();
        g.extend(self.quadratic_part::<S>()?.iter().map(|p| p.scale(&S::half())));
        Ok(g)
    }

    /// Exponents `(s, p_l, p_r)` of the sublevel bound for the model's curvature
    /// weight.
    pub fn sublevel_exponents(&self) -> Result<SublevelExponents> {
        match self {
            Model::MaximalR5 | Model::MaximalC5 => SublevelExponents::new(Ext::int(1), Ext::int(2), Ext::int(2)),
            Model::HarmonicR8 => SublevelExponents::new(Ext::int(1), Ext::int(3), Ext::int(3)),
            Model::Asymmetric { d_r: 1 } => SublevelExponents::new(Ext::Infinity, Ext::Infinity, Ext::int(1)),
            Model::Asymmetric { d_r } => {
                SublevelExponents::new(Ext::Finite(Rational::new(1, *d_r as i64 - 1)), Ext::Infinity, Ext::int(1))
            }
            Model::Bilinear(_) => Err(Error::Unsupported { model: self.id(), what: "sublevel exponents".into() }),
        }
    }

    pub fn gamma_eval(&self, t: &[f64]) -> Result<GammaPoint> {
        check_dim(self.param_dim(), t.len())?;
        let g = self.gamma::<f64>()?;
        Ok(GammaPoint { value: g.iter().map(|p| p.eval(t)).collect(), in_region: self.param_region().contains(t) })
    }

    /// Closed-form curvature weight in terms of the left and right offsets
    /// `a = t^l − t^c`, `b = t^r − t^c` (bilinear layouts: `a = x^l − x^c`,
    /// `b = y^r − y^c`).
    ///
    /// For `maximal_c5` this is the sum restricted to index sets that respect the
    /// complex structure, `(Σ_k |a_k|⁴ + |b_k|⁴)^{1/2} |det_C(a, b)|²`, which bounds
    /// the full sum from below.
    pub fn k_closed_form(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let k = self.dims().d_l();
        let kr = self.dims().d_r();
        check_dim(k, a.len())?;
        check_dim(kr, b.len())?;
        let n2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        Ok(match self {
            Model::MaximalR5 => (n2(a) + n2(b)).sqrt() * (a[0] * b[1] - a[1] * b[0]).abs(),
            Model::HarmonicR8 => (n2(a) + n2(b)).sqrt() * harmonic_gram(a, b),
            Model::MaximalC5 => {
                let za = [(a[0], a[1]), (a[2], a[3])];
                let zb = [(b[0], b[1]), (b[2], b[3])];
                let re = za[0].0 * zb[1].0 - za[0].1 * zb[1].1 - (za[1].0 * zb[0].0 - za[1].1 * zb[0].1);
                let im = za[0].0 * zb[1].1 + za[0].1 * zb[1].0 - (za[1].0 * zb[0].1 + za[1].1 * zb[0].0);
                let det2 = re * re + im * im;
                let quart: f64 = za.iter().chain(&zb).map(|(x, y)| (x * x + y * y).powi(2)).sum();
                quart.sqrt() * det2
            }
            Model::Asymmetric { d_r } => {
                let u = a[0];
                u.abs().powi(*d_r as i32 - 1) * (u * u + n2(b)).sqrt()
            }
            Model::Bilinear(q) => q.k_from_offsets(a, b),
        })
    }
}

/// `|a|²|b|² − (a·b)²`, the sublevel functional of the harmonic model.
pub fn harmonic_gram(a: &[f64], b: &[f64]) -> f64 {
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    aa * bb - ab * ab
}

/// Index-set filter for `maximal_c5`: the real pairs `{0,1}` and `{2,3}` of each
/// frame are taken together or not at all.
pub fn complex_pairs_respected(s_l: &[usize], s_r: &[usize]) -> bool {
    let ok = |s: &[usize]| [(0, 1), (2, 3)].iter().all(|&(p, q)| s.contains(&p) == s.contains(&q));
    ok(s_l) && ok(s_r)
}
