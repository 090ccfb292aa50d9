//! Exact exponent geometry: dimension triples, the Knapp vertex, the admissible
//! triangle and the sublevel-to-restricted-weak-type exponent algebra.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// `(n_L, n_R, ℓ)` with `ℓ < min(n_L, n_R)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DimensionTriple {
    n_l: usize,
    n_r: usize,
    ell: usize,
}

impl DimensionTriple {
    pub fn new(n_l: usize, n_r: usize, ell: usize) -> Result<Self> {
        if ell == 0 || ell >= n_l || ell >= n_r {
            return Err(Error::InvalidDimensions(format!("need 0 < ell < min(n_L, n_R), got ({n_l}, {n_r}, {ell})")));
        }
        Ok(DimensionTriple { n_l, n_r, ell })
    }

    pub fn n_l(&self) -> usize {
        self.n_l
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Kernel dimension of `dπ_L`, i.e. `n_R − ℓ`.
    pub fn d_l(&self) -> usize {
        self.n_r - self.ell
    }

    /// Kernel dimension of `dπ_R`, i.e. `n_L − ℓ`.
    pub fn d_r(&self) -> usize {
        self.n_l - self.ell
    }

    pub fn kappa(&self) -> usize {
        self.d_l() + self.d_r() - self.ell
    }

    /// `n_L n_R − ℓ²`.
    pub fn denominator(&self) -> i64 {
        (self.n_l * self.n_r) as i64 - (self.ell * self.ell) as i64
    }
}

impl fmt::Display for DimensionTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.n_l, self.n_r, self.ell)
    }
}

/// A point of the `(1/q_L, 1/q_R)` square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RationalPoint {
    pub x: Rational,
    pub y: Rational,
}

impl RationalPoint {
    pub fn new(x: Rational, y: Rational) -> Self {
        RationalPoint { x, y }
    }

    pub fn from_ints(xn: i64, xd: i64, yn: i64, yd: i64) -> Self {
        RationalPoint { x: Rational::new(xn, xd), y: Rational::new(yn, yd) }
    }

    /// Bilinear `(1/q_L, 1/q_R)` to operator `(1/p, 1/q) = (1/q_L, 1 − 1/q_R)`.
    pub fn to_operator(self) -> RationalPoint {
        RationalPoint { x: self.x, y: Rational::one() - self.y }
    }

    pub fn to_f64(self) -> (f64, f64) {
        (to_f64(self.x), to_f64(self.y))
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `(n_R(n_L−ℓ), n_L(n_R−ℓ)) / (n_L n_R − ℓ²)`.
pub fn mainpt(d: DimensionTriple) -> Result<RationalPoint> {
    let den = d.denominator();
    if den <= 0 {
        return Err(Error::InvalidDimensions(format!("n_L n_R - ell^2 = {den} for {d}")));
    }
    let (nl, nr, l) = (d.n_l as i64, d.n_r as i64, d.ell as i64);
    Ok(RationalPoint::new(Rational::new(nr * (nl - l), den), Rational::new(nl * (nr - l), den)))
}

/// Half-plane `a·x + b·y ≤ c` in the `(1/q_L, 1/q_R)` square.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

impl Constraint {
    pub fn slack(&self, p: RationalPoint) -> Rational {
        self.c - self.a * p.x - self.b * p.y
    }

    pub fn holds(&self, p: RationalPoint) -> bool {
        self.slack(p) >= Rational::zero()
    }

    pub fn on_line(&self, p: RationalPoint) -> bool {
        self.slack(p).is_zero()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RieszTriangle {
    pub vertices: [RationalPoint; 3],
}

impl RieszTriangle {
    /// Closed-triangle membership via barycentric signs, in exact arithmetic.
    pub fn contains(&self, p: RationalPoint) -> bool {
        let [a, b, c] = self.vertices;
        let cross = |o: RationalPoint, u: RationalPoint, v: RationalPoint| {
            (u.x - o.x) * (v.y - o.y) - (u.y - o.y) * (v.x - o.x)
        };
        let d1 = cross(a, b, p);
        let d2 = cross(b, c, p);
        let d3 = cross(c, a, p);
        let z = Rational::zero();
        let has_neg = d1 < z || d2 < z || d3 < z;
        let has_pos = d1 > z || d2 > z || d3 > z;
        !(has_neg && has_pos)
    }

    pub fn contains_strictly(&self, p: RationalPoint) -> bool {
        let [a, b, c] = self.vertices;
        let cross = |o: RationalPoint, u: RationalPoint, v: RationalPoint| {
            (u.x - o.x) * (v.y - o.y) - (u.y - o.y) * (v.x - o.x)
        };
        let s = [cross(a, b, p), cross(b, c, p), cross(c, a, p)];
        let z = Rational::zero();
        s.iter().all(|v| *v > z) || s.iter().all(|v| *v < z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdmissibleRegion {
    pub triangle: RieszTriangle,
    /// `1/q_L + (ℓ/n_L)/q_R ≤ 1`.
    pub knapp_left: Constraint,
    /// `(ℓ/n_R)/q_L + 1/q_R ≤ 1`.
    pub knapp_right: Constraint,
}

impl AdmissibleRegion {
    pub fn satisfies_constraints(&self, p: RationalPoint) -> bool {
        self.knapp_left.holds(p) && self.knapp_right.holds(p)
    }
}

pub fn admissible_region(d: DimensionTriple) -> Result<AdmissibleRegion> {
    let v = mainpt(d)?;
    let one = Rational::one();
    let (nl, nr, l) = (d.n_l as i64, d.n_r as i64, d.ell as i64);
    Ok(AdmissibleRegion {
        triangle: RieszTriangle { vertices: [RationalPoint::new(one, Rational::zero()), RationalPoint::new(Rational::zero(), one), v] },
        knapp_left: Constraint { a: one, b: Rational::new(l, nl), c: one },
        knapp_right: Constraint { a: Rational::new(l, nr), b: one, c: one },
    })
}

/// An exponent in `[1, ∞]` (or `s ∈ (0, ∞]`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ext {
    Finite(Rational),
    Infinity,
}

impl Ext {
    pub fn int(v: i64) -> Ext {
        Ext::Finite(Rational::from_integer(v))
    }

    /// `1/x` with `1/∞ = 0`.
    pub fn recip(self) -> Rational {
        match self {
            Ext::Finite(v) => v.recip(),
            Ext::Infinity => Rational::zero(),
        }
    }

    /// `1/p'` for the Hölder dual `p'`, i.e. `1 − 1/p`.
    pub fn dual_recip(self) -> Rational {
        Rational::one() - self.recip()
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Ext::Finite(v) => to_f64(v),
            Ext::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Finite(v) => write!(f, "{v}"),
            Ext::Infinity => write!(f, "inf"),
        }
    }
}

/// Exponents in `W_α(χ_{E^l}, χ_{E^r}) ≲ α^s |E^l|^{1/p_l} |E^r|^{1/p_r}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SublevelExponents {
    pub s: Ext,
    pub p_l: Ext,
    pub p_r: Ext,
}

impl SublevelExponents {
    pub fn new(s: Ext, p_l: Ext, p_r: Ext) -> Result<Self> {
        if let Ext::Finite(v) = s {
            if v <= Rational::zero() {
                return Err(Error::InvalidArgument(format!("s must be positive, got {v}")));
            }
        }
        for p in [p_l, p_r] {
            if let Ext::Finite(v) = p {
                if v < Rational::one() {
                    return Err(Error::InvalidArgument(format!("exponent {v} below 1")));
                }
            }
        }
        Ok(SublevelExponents { s, p_l, p_r })
    }

    /// `(s p_l')^{-1}`.
    pub fn left_weight(&self) -> Rational {
        self.s.recip() * self.p_l.dual_recip()
    }

    /// `(s p_r')^{-1}`.
    pub fn right_weight(&self) -> Rational {
        self.s.recip() * self.p_r.dual_recip()
    }
}

/// `1/q_L = (2 − ε + (s p_l')^{-1}) / (3 + (s p_l')^{-1} + (s p_r')^{-1})`, and
/// symmetrically for `q_R`.
pub fn exponents_from_sublevel(se: &SublevelExponents, eps: Rational) -> RationalPoint {
    let wl = se.left_weight();
    let wr = se.right_weight();
    let two = Rational::from_integer(2);
    let den = Rational::from_integer(3) + wl + wr;
    RationalPoint::new((two - eps + wl) / den, (two - eps + wr) / den)
}

/// Whether the sublevel exponents meet the Knapp lines at the vertex:
/// `1 + (s p_l')^{-1} = ℓ/(n_R − ℓ)` and `1 + (s p_r')^{-1} = ℓ/(n_L − ℓ)`.
pub fn sharpness_criterion(se: &SublevelExponents, d: DimensionTriple) -> bool {
    let one = Rational::one();
    let l = d.ell as i64;
    one + se.left_weight() == Rational::new(l, (d.n_r - d.ell) as i64)
        && one + se.right_weight() == Rational::new(l, (d.n_l - d.ell) as i64)
}
