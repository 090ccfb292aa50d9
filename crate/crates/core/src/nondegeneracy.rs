//! Bracket-spanning hypotheses for the two-parameter and one-parameter families.

use crate::error::{check_dim, Error, Result};
use crate::field::{lie_bracket, FramePair, PolyVectorField};
use crate::linalg::{spanning_check, DEFAULT_SPAN_TOL};

/// Which side carries the fixed directions `v`, `v'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// `[X_L^i, v·X_R]` for both `i`, plus `[w·X_L, v'·X_R]`.
    First,
    /// `[v·X_L, X_R^j]` for both `j`, plus `[v'·X_L, w·X_R]`.
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpanningOutcome {
    pub holds: bool,
    /// A basis vector `w` for which the seven fields span.
    pub witness: Option<[f64; 2]>,
}

fn fields_at(fields: &[PolyVectorField<f64>], point: &[f64]) -> Vec<Vec<f64>> {
    fields.iter().map(|f| f.eval(point)).collect()
}

/// The seven-field family for a given `w`, evaluated at `point`.
pub fn two_param_family(
    frames: &FramePair<f64>,
    point: &[f64],
    v: [f64; 2],
    v2: [f64; 2],
    w: [f64; 2],
    cond: Condition,
) -> Result<Vec<Vec<f64>>> {
    let (fixed, moving) = match cond {
        Condition::First => (&frames.left, &frames.right),
        Condition::Second => (&frames.right, &frames.left),
    };
    let v_m = PolyVectorField::combination(&v, moving)?;
    let v2_m = PolyVectorField::combination(&v2, moving)?;
    let w_f = PolyVectorField::combination(&w, fixed)?;
    let oriented = |a: &PolyVectorField<f64>, b: &PolyVectorField<f64>| match cond {
        Condition::First => lie_bracket(a, b),
        Condition::Second => lie_bracket(b, a),
    };
    let mut fields: Vec<PolyVectorField<f64>> = frames.left.iter().chain(&frames.right).cloned().collect();
    for f in fixed {
        fields.push(oriented(f, &v_m)?);
    }
    fields.push(oriented(&w_f, &v2_m)?);
    Ok(fields_at(&fields, point))
}

/// Decides the existential over `w` by linearity: the spanning determinant is
/// linear in `w`, so it is nonzero for some `w` iff it is for `e_1` or `e_2`.
pub fn two_param_spanning(
    frames: &FramePair<f64>,
    point: &[f64],
    v: [f64; 2],
    v2: [f64; 2],
    cond: Condition,
) -> Result<SpanningOutcome> {
    if frames.d_l() != 2 || frames.d_r() != 2 || frames.ambient_dim() != 7 {
        return Err(Error::InvalidDimensions(format!(
            "need d_L = d_R = 2 on a 7-dimensional manifold, got ({}, {}, {})",
            frames.d_l(),
            frames.d_r(),
            frames.ambient_dim()
        )));
    }
    check_dim(7, point.len())?;
    let cross = v[0] * v2[1] - v[1] * v2[0];
    let scale = v[0].hypot(v[1]) * v2[0].hypot(v2[1]);
    if cross.abs() <= 1e-12 * scale || scale == 0.0 {
        return Err(Error::InvalidArgument("v and v' must be linearly independent".into()));
    }
    for w in [[1.0, 0.0], [0.0, 1.0]] {
        let family = two_param_family(frames, point, v, v2, w, cond)?;
        if spanning_check(&family, 7, DEFAULT_SPAN_TOL)? {
            return Ok(SpanningOutcome { holds: true, witness: Some(w) });
        }
    }
    Ok(SpanningOutcome { holds: false, witness: None })
}

/// `{X_L, X_R^j, [X_L, X_R^j]}` spans, for `d_L = 1`, `n_L = 2 d_R`,
/// `n_R = d_R + 1`, `ℓ = d_R`.
pub fn one_param_spanning(frames: &FramePair<f64>, point: &[f64]) -> Result<bool> {
    let d_r = frames.d_r();
    if frames.d_l() != 1 || frames.n_l != 2 * d_r || frames.n_r != d_r + 1 || frames.ell != d_r {
        return Err(Error::InvalidDimensions(format!(
            "need d_L = 1, n_L = 2 d_R, n_R = d_R + 1, ell = d_R; got n_L = {}, n_R = {}, ell = {}",
            frames.n_l, frames.n_r, frames.ell
        )));
    }
    check_dim(frames.ambient_dim(), point.len())?;
    let xl = &frames.left[0];
    let mut fields = vec![xl.clone()];
    fields.extend(frames.right.iter().cloned());
    for xr in &frames.right {
        fields.push(lie_bracket(xl, xr)?);
    }
    spanning_check(&fields_at(&fields, point), frames.ambient_dim(), DEFAULT_SPAN_TOL)
}
