//! The dyadic interpolation inequality: a double sum of minima of two weighted
//! products is bounded by a single interpolated product.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finitely supported sequence indexed by `Z`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DyadicSeq(pub BTreeMap<i32, f64>);

impl DyadicSeq {
    pub fn new() -> Self {
        DyadicSeq(BTreeMap::new())
    }

    pub fn spike(i: i32, v: f64) -> Self {
        let mut s = Self::new();
        s.set(i, v);
        s
    }

    /// Stores `v`; zeros are dropped so the support stays exact.
    pub fn set(&mut self, i: i32, v: f64) {
        if v == 0.0 {
            self.0.remove(&i);
        } else {
            self.0.insert(i, v);
        }
    }

    pub fn add(&mut self, i: i32, v: f64) {
        let cur = self.get(i);
        self.set(i, cur + v);
    }

    pub fn get(&self, i: i32) -> f64 {
        self.0.get(&i).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.0.iter().map(|(i, v)| (*i, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn l1(&self) -> f64 {
        self.0.values().map(|v| v.abs()).sum()
    }

    pub fn linf(&self) -> f64 {
        self.0.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::new();
        for (i, v) in self.iter() {
            out.set(i, v * c);
        }
        out
    }
}

/// `x^{1/p}` with `x^{1/∞} = 1` for `x > 0` and `0^{1/∞} = 0`.
pub fn root(x: f64, p: f64) -> f64 {
    if p.is_infinite() {
        if x > 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        x.powf(1.0 / p)
    }
}

fn recip(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// `(a_k, b_k, p_k, q_k)` for `k = 0, 1`, the interpolation parameter `θ` and
/// the constants `A_0`, `A_1`. Exponents may be `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarcParams {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub theta: f64,
    pub big_a: [f64; 2],
}

/// Parameters after shifting to `a_θ = b_θ = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalized {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub p_theta: f64,
    pub q_theta: f64,
}

impl MarcParams {
    pub fn new(a: [f64; 2], b: [f64; 2], p: [f64; 2], q: [f64; 2], theta: f64, big_a: [f64; 2]) -> Result<Self> {
        let params = MarcParams { a, b, p, q, theta, big_a };
        params.validate()?;
        Ok(params)
    }

    /// Instantiation for the `|det(u, v)|` sublevel sets.
    pub fn maximal(alpha: f64) -> Self {
        let inf = f64::INFINITY;
        MarcParams { a: [1.0, -1.0], b: [-1.0, 1.0], p: [inf, 1.0], q: [1.0, inf], theta: 0.5, big_a: [alpha, alpha] }
    }

    /// Instantiation for the harmonic Gram sublevel sets.
    pub fn harmonic(alpha: f64) -> Self {
        let inf = f64::INFINITY;
        MarcParams { a: [1.0, -2.0], b: [-2.0, 1.0], p: [inf, 1.0], q: [1.0, inf], theta: 0.5, big_a: [alpha, alpha] }
    }

    pub fn with_constants(mut self, a0: f64, a1: f64) -> Self {
        self.big_a = [a0, a1];
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::DegenerateParams(format!("theta = {} not in (0, 1)", self.theta)));
        }
        for &e in self.p.iter().chain(&self.q) {
            if e.is_nan() || e < 1.0 {
                return Err(Error::DegenerateParams(format!("exponent {e} not in [1, inf]")));
            }
        }
        let det_a = self.a[0] * recip(self.p[1]) - self.a[1] * recip(self.p[0]);
        let det_b = self.b[0] * recip(self.q[1]) - self.b[1] * recip(self.q[0]);
        if det_a == 0.0 || det_b == 0.0 {
            return Err(Error::DegenerateParams("exponent determinants must be nonzero".into()));
        }
        for k in 0..2 {
            if recip(self.p[k]) + recip(self.q[k]) < 1.0 {
                return Err(Error::DegenerateParams(format!("1/p_{k} + 1/q_{k} < 1")));
            }
        }
        if self.big_a.iter().any(|v| *v < 0.0 || v.is_nan()) {
            return Err(Error::DegenerateParams("A_0, A_1 must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn a_theta(&self) -> f64 {
        (1.0 - self.theta) * self.a[0] + self.theta * self.a[1]
    }

    pub fn b_theta(&self) -> f64 {
        (1.0 - self.theta) * self.b[0] + self.theta * self.b[1]
    }

    pub fn p_theta(&self) -> f64 {
        1.0 / ((1.0 - self.theta) * recip(self.p[0]) + self.theta * recip(self.p[1]))
    }

    pub fn q_theta(&self) -> f64 {
        1.0 / ((1.0 - self.theta) * recip(self.q[0]) + self.theta * recip(self.q[1]))
    }

    /// `a_k ↦ a_k − a_θ p_θ / p_k`, `b_k ↦ b_k − b_θ q_θ / q_k`.
    pub fn normalized(&self) -> Result<Normalized> {
        self.validate()?;
        let (pt, qt) = (self.p_theta(), self.q_theta());
        if pt.is_infinite() || qt.is_infinite() {
            return Err(Error::DegenerateParams("p_theta and q_theta must be finite".into()));
        }
        let (at, bt) = (self.a_theta(), self.b_theta());
        let a = [self.a[0] - at * pt * recip(self.p[0]), self.a[1] - at * pt * recip(self.p[1])];
        let b = [self.b[0] - bt * qt * recip(self.q[0]), self.b[1] - bt * qt * recip(self.q[1])];
        if a.iter().chain(&b).any(|v| v.abs() < 1e-12) {
            return Err(Error::DegenerateParams("a normalized exponent vanishes".into()));
        }
        if b[0].signum() == b[1].signum() {
            return Err(Error::DegenerateParams("normalized b_0, b_1 must have opposite signs".into()));
        }
        Ok(Normalized { a, b, p_theta: pt, q_theta: qt })
    }

    /// The `ℓ^∞` and `ℓ^1` bounds of `T_k`: `(1/(1 − 2^{−|b_k|}), 1/(1 − 2^{−|a_k|}))`.
    pub fn t_bounds(&self) -> Result<[(f64, f64); 2]> {
        let n = self.normalized()?;
        let g = |x: f64| 1.0 / (1.0 - 2f64.powf(-x.abs()));
        Ok([(g(n.b[0]), g(n.a[0])), (g(n.b[1]), g(n.a[1]))])
    }
}

/// `Σ_{i,j} min{A_0 2^{a_0 i + b_0 j} |f_i|^{1/p_0} |g_j|^{1/q_0}, A_1 2^{a_1 i + b_1 j} |f_i|^{1/p_1} |g_j|^{1/q_1}}`.
pub fn marc_lhs(params: &MarcParams, f: &DyadicSeq, g: &DyadicSeq) -> f64 {
    let mut total = 0.0;
    for (i, fi) in f.iter() {
        let fi = fi.abs();
        let fr = [root(fi, params.p[0]), root(fi, params.p[1])];
        for (j, gj) in g.iter() {
            let gj = gj.abs();
            let t0 = params.big_a[0]
                * 2f64.powf(params.a[0] * i as f64 + params.b[0] * j as f64)
                * fr[0]
                * root(gj, params.q[0]);
            let t1 = params.big_a[1]
                * 2f64.powf(params.a[1] * i as f64 + params.b[1] * j as f64)
                * fr[1]
                * root(gj, params.q[1]);
            total += t0.min(t1);
        }
    }
    total
}

/// `A_0^{1−θ} A_1^θ (Σ 2^{a_θ p_θ i}|f_i|)^{1/p_θ} (Σ 2^{b_θ q_θ j}|g_j|)^{1/q_θ}`.
pub fn marc_rhs(params: &MarcParams, f: &DyadicSeq, g: &DyadicSeq) -> Result<f64> {
    params.validate()?;
    let (pt, qt) = (params.p_theta(), params.q_theta());
    if pt.is_infinite() || qt.is_infinite() {
        return Err(Error::DegenerateParams("p_theta and q_theta must be finite".into()));
    }
    let (at, bt) = (params.a_theta(), params.b_theta());
    let sf: f64 = f.iter().map(|(i, v)| 2f64.powf(at * pt * i as f64) * v.abs()).sum();
    let sg: f64 = g.iter().map(|(j, v)| 2f64.powf(bt * qt * j as f64) * v.abs()).sum();
    let th = params.theta;
    Ok(params.big_a[0].powf(1.0 - th) * params.big_a[1].powf(th) * sf.powf(1.0 / pt) * sg.powf(1.0 / qt))
}

/// Admissible constant `2 C_0^{1−θ} C_1^θ` with
/// `C_k = ‖T_k‖_{∞→∞}^{1/p_k} ‖T_k‖_{1→1}^{1/p_k'}`: the Riesz–Thorin bound of
/// `T_k` on `ℓ^{p_k'}`, combined through the optimal choice of the split `s`.
pub fn marc_explicit_constant(params: &MarcParams) -> Result<f64> {
    let bounds = params.t_bounds()?;
    let c: Vec<f64> = (0..2)
        .map(|k| {
            let inv_p = recip(params.p[k]);
            bounds[k].0.powf(inv_p) * bounds[k].1.powf(1.0 - inv_p)
        })
        .collect();
    Ok(2.0 * c[0].powf(1.0 - params.theta) * c[1].powf(params.theta))
}

/// Which of the two split operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    /// Sum over `j < τ i + s`, the side whose normalized `b` is positive.
    Lower,
    /// Sum over `j ≥ τ i + s`, the side whose normalized `b` is negative.
    Upper,
}

/// `(T e)_i` for `i ∈ [lo, hi]`, with `τ = −a_k/b_k` and weights
/// `2^{a_k i + b_k j − b_k s}`, where `k` is the normalized side selected by
/// `split`. Returns the values in index order.
pub fn apply_split(params: &MarcParams, split: Split, s: f64, e: &DyadicSeq, lo: i32, hi: i32) -> Result<Vec<f64>> {
    let n = params.normalized()?;
    let k = match split {
        Split::Lower => usize::from(n.b[0] < 0.0),
        Split::Upper => usize::from(n.b[0] > 0.0),
    };
    let (a, b) = (n.a[k], n.b[k]);
    let tau = -a / b;
    Ok((lo..=hi)
        .map(|i| {
            let cut = tau * i as f64 + s;
            e.iter()
                .filter(|(j, _)| match split {
                    Split::Lower => (*j as f64) < cut,
                    Split::Upper => (*j as f64) >= cut,
                })
                .map(|(j, v)| 2f64.powf(a * i as f64 + b * j as f64 - b * s) * v)
                .sum()
        })
        .collect())
}

/// `(‖·‖_∞ bound, ‖·‖_1 bound)` for the operator selected by `split`.
pub fn split_bounds(params: &MarcParams, split: Split) -> Result<(f64, f64)> {
    let n = params.normalized()?;
    let bounds = params.t_bounds()?;
    let k = match split {
        Split::Lower => usize::from(n.b[0] < 0.0),
        Split::Upper => usize::from(n.b[0] > 0.0),
    };
    Ok(bounds[k])
}
