//! Polynomial vector fields, Lie brackets and kernel frames.

use crate::error::{check_dim, Error, Result};
use crate::poly::MultiPoly;
use crate::scalar::Scalar;

/// `Σ_i c_i(x) ∂_i` on `R^N` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVectorField<S> {
    comps: Vec<MultiPoly<S>>,
}

impl<S: Scalar> PolyVectorField<S> {
    pub fn new(comps: Vec<MultiPoly<S>>) -> Result<Self> {
        let n = comps.len();
        if n == 0 {
            return Err(Error::InvalidDimensions("vector field needs at least one component".into()));
        }
        for c in &comps {
            check_dim(n, c.nvars())?;
        }
        Ok(PolyVectorField { comps })
    }

    pub fn zero(dim: usize) -> Self {
        PolyVectorField { comps: (0..dim).map(|_| MultiPoly::zero(dim)).collect() }
    }

    /// The coordinate field `∂_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.comps[i] = MultiPoly::one(dim);
        v
    }

    /// Field from sparse `(coordinate, coefficient)` pairs.
    pub fn from_sparse(dim: usize, entries: Vec<(usize, MultiPoly<S>)>) -> Self {
        let mut v = Self::zero(dim);
        for (i, c) in entries {
            v.comps[i] = &v.comps[i] + &c;
        }
        v
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[MultiPoly<S>] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &MultiPoly<S> {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Directional derivative `V f = Σ_j V_j ∂_j f`.
    pub fn apply(&self, f: &MultiPoly<S>) -> MultiPoly<S> {
        let mut out = MultiPoly::zero(self.dim());
        for (j, vj) in self.comps.iter().enumerate() {
            if vj.is_zero() {
                continue;
            }
            let d = f.partial(j);
            if !d.is_zero() {
                out = &out + &(vj * &d);
            }
        }
        out
    }

    pub fn eval(&self, x: &[S]) -> Vec<S> {
        self.comps.iter().map(|c| c.eval(x)).collect()
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval_f64(x)).collect()
    }

    pub fn scale(&self, c: &S) -> Self {
        PolyVectorField { comps: self.comps.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(PolyVectorField { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect() })
    }

    /// `Σ_k c_k V_k` with constant coefficients.
    pub fn combination(coeffs: &[S], fields: &[PolyVectorField<S>]) -> Result<Self> {
        check_dim(fields.len(), coeffs.len())?;
        let dim = fields.first().map(|f| f.dim()).ok_or_else(|| Error::InvalidArgument("empty combination".into()))?;
        let mut out = Self::zero(dim);
        for (c, f) in coeffs.iter().zip(fields) {
            out = out.add(&f.scale(c))?;
        }
        Ok(out)
    }
}

/// `[V, W]_i = Σ_j (V_j ∂_j W_i − W_j ∂_j V_i)`.
pub fn lie_bracket<S: Scalar>(v: &PolyVectorField<S>, w: &PolyVectorField<S>) -> Result<PolyVectorField<S>> {
    check_dim(v.dim(), w.dim())?;
    let comps = (0..v.dim()).map(|i| &v.apply(&w.comps[i]) - &w.apply(&v.comps[i])).collect();
    Ok(PolyVectorField { comps })
}

/// Bases of `ker dπ_L` (left) and `ker dπ_R` (right) on an incidence manifold of
/// dimension `d_L + d_R + ℓ`, with `d_L = n_R − ℓ` and `d_R = n_L − ℓ`.
#[derive(Clone, Debug)]
pub struct FramePair<S> {
    pub left: Vec<PolyVectorField<S>>,
    pub right: Vec<PolyVectorField<S>>,
    pub n_l: usize,
    pub n_r: usize,
    pub ell: usize,
}

impl<S: Scalar> FramePair<S> {
    pub fn new(
        left: Vec<PolyVectorField<S>>,
        right: Vec<PolyVectorField<S>>,
        n_l: usize,
        n_r: usize,
        ell: usize,
    ) -> Result<Self> {
        let d_l = left.len();
        let d_r = right.len();
        if n_r < ell || n_r - ell != d_l || n_l < ell || n_l - ell != d_r {
            return Err(Error::InvalidDimensions(format!(
                "frame sizes ({d_l}, {d_r}) do not match (n_L, n_R, ell) = ({n_l}, {n_r}, {ell})"
            )));
        }
        let ambient = d_l + d_r + ell;
        for f in left.iter().chain(&right) {
            check_dim(ambient, f.dim())?;
        }
        Ok(FramePair { left, right, n_l, n_r, ell })
    }

    pub fn d_l(&self) -> usize {
        self.left.len()
    }

    pub fn d_r(&self) -> usize {
        self.right.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.d_l() + self.d_r() + self.ell
    }
}
