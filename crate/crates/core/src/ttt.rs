//! Bilinear forms, the refinement step and the three-fold composition bound
//! `(∫_G T χ_F)³ ≤ 27 |F| |G| ∫_G T_{GF} T*_{G'F'} T_{GF} χ_F`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::LatticeSet;
use crate::mc::{mc_mean, run_in_pool, Estimate, McConfig};
use crate::operator::{AveragingOperator, Indicator};

/// Inner samples per outer sample in [`ttt_form`].
pub const TTT_INNER: usize = 16;

#[derive(Clone, Debug)]
pub struct SetPair {
    /// Subset of the left space (`R^{n_L}`).
    pub f: LatticeSet,
    /// Subset of the right space (`R^{n_R}`).
    pub g: LatticeSet,
}

#[derive(Clone, Debug)]
pub struct RefinedPair {
    pub f: LatticeSet,
    pub g: LatticeSet,
    pub delta_f: f64,
    pub delta_g: f64,
    /// Midpoint-rule value of `∫_G T χ_F` used for the thresholds.
    pub form: f64,
}

fn check_dims(op: &AveragingOperator, f: &impl Indicator, g: &impl Indicator) -> Result<()> {
    if f.dim() != op.left_dim() {
        return Err(Error::DimensionMismatch { expected: op.left_dim(), found: f.dim() });
    }
    if g.dim() != op.right_dim() {
        return Err(Error::DimensionMismatch { expected: op.right_dim(), found: g.dim() });
    }
    Ok(())
}

/// `∫_G T χ_F`, sampling `x_R ∈ G` and a fiber parameter.
pub fn bilinear_form(op: &AveragingOperator, f: &impl Indicator, g: &LatticeSet, cfg: &McConfig) -> Result<Estimate> {
    check_dims(op, f, g)?;
    if g.is_empty() {
        return Ok(Estimate::exact(0.0));
    }
    let region = op.right_region();
    let scale = g.measure() * region.volume();
    let (nl, nr, k) = (op.left_dim(), op.right_dim(), region.dim());
    let est = mc_mean(
        cfg,
        || (vec![0.0; nr], vec![0.0; k], vec![0.0; nl]),
        |rng, (x, s, y)| {
            g.sample(rng, x).expect("nonempty");
            region.sample(rng, s);
            if op.push_left(x, s, y) && f.contains(y) {
                1.0
            } else {
                0.0
            }
        },
    )?;
    Ok(est.scale(scale))
}

/// `∫_F T* χ_G`, sampling `x_L ∈ F` and a fiber parameter. Equal to
/// [`bilinear_form`] in expectation.
pub fn bilinear_form_adjoint(
    op: &AveragingOperator,
    f: &LatticeSet,
    g: &impl Indicator,
    cfg: &McConfig,
) -> Result<Estimate> {
    check_dims(op, f, g)?;
    if f.is_empty() {
        return Ok(Estimate::exact(0.0));
    }
    let region = op.left_region();
    let scale = f.measure() * region.volume();
    let (nl, nr, k) = (op.left_dim(), op.right_dim(), region.dim());
    let est = mc_mean(
        cfg,
        || (vec![0.0; nl], vec![0.0; k], vec![0.0; nr]),
        |rng, (x, r, y)| {
            f.sample(rng, x).expect("nonempty");
            region.sample(rng, r);
            if op.lift_right(x, r, y) && g.contains(y) {
                1.0
            } else {
                0.0
            }
        },
    )?;
    Ok(est.scale(scale))
}

/// Midpoint-rule `∫_G T χ_F` over the cells of `G`.
pub fn bilinear_form_quadrature(op: &AveragingOperator, f: &LatticeSet, g: &LatticeSet) -> Result<f64> {
    check_dims(op, f, g)?;
    let vol = g.cell_volume();
    let cells = g.cells()?;
    Ok(cells.par_iter().map(|c| op.apply_set(f, &g.cell_center(c))).sum::<f64>() * vol)
}

/// `F' = {T* χ_G ≥ δ_F}` and `G' = {T χ_F ≥ δ_G}` cell by cell, with
/// `δ_F = B/(3|F|)`, `δ_G = B/(3|G|)`.
pub fn refine(op: &AveragingOperator, f: &LatticeSet, g: &LatticeSet) -> Result<RefinedPair> {
    check_dims(op, f, g)?;
    if f.is_empty() || g.is_empty() {
        return Err(Error::EmptySet);
    }
    let g_cells = g.cells()?;
    let t_f: Vec<f64> = g_cells.par_iter().map(|c| op.apply_set(f, &g.cell_center(c))).collect();
    let form = t_f.iter().sum::<f64>() * g.cell_volume();
    if form <= 0.0 {
        return Err(Error::TrivialPair);
    }
    let delta_f = form / (3.0 * f.measure());
    let delta_g = form / (3.0 * g.measure());
    let f_cells = f.cells()?;
    let keep_f: Vec<Vec<i64>> = f_cells
        .par_iter()
        .filter(|c| op.apply_adjoint_set(g, &f.cell_center(c)) >= delta_f)
        .cloned()
        .collect();
    let keep_g: Vec<Vec<i64>> =
        g_cells.iter().zip(&t_f).filter(|(_, v)| **v >= delta_g).map(|(c, _)| c.clone()).collect();
    Ok(RefinedPair {
        f: LatticeSet::from_cells(f.dim(), f.origin().to_vec(), f.spacing(), keep_f)?,
        g: LatticeSet::from_cells(g.dim(), g.origin().to_vec(), g.spacing(), keep_g)?,
        delta_f,
        delta_g,
        form,
    })
}

/// `∫_{M_3} χ_G(π_R m^l) χ_{F'}(π_L m^c) χ_{G'}(π_R m^c) χ_F(π_L m^r)`.
///
/// The outer sample draws `m^c = (x_R^c, s^c)` with `x_R^c ∈ G'`; for each hit
/// with `π_L m^c ∈ F'`, [`TTT_INNER`] independent draws of the left and right
/// fiber parameters estimate the two remaining factors.
pub fn ttt_form(
    op: &AveragingOperator,
    f: &LatticeSet,
    g: &LatticeSet,
    f2: &LatticeSet,
    g2: &LatticeSet,
    cfg: &McConfig,
) -> Result<Estimate> {
    check_dims(op, f, g)?;
    check_dims(op, f2, g2)?;
    if f2.is_empty() || g2.is_empty() || f.is_empty() || g.is_empty() {
        return Ok(Estimate::exact(0.0));
    }
    let rr = op.right_region();
    let lr = op.left_region();
    let scale = g2.measure() * rr.volume() * lr.volume() * rr.volume();
    let (nl, nr) = (op.left_dim(), op.right_dim());
    let est = mc_mean(
        cfg,
        || (vec![0.0; nr], vec![0.0; rr.dim()], vec![0.0; nl], vec![0.0; lr.dim()], vec![0.0; nr], vec![0.0; nl]),
        |rng, (xc, sc, xlc, r, xrl, xlr)| {
            g2.sample(rng, xc).expect("nonempty");
            rr.sample(rng, sc);
            if !op.push_left(xc, sc, xlc) || !f2.contains(xlc) {
                return 0.0;
            }
            let mut left_hits = 0usize;
            let mut right_hits = 0usize;
            for _ in 0..TTT_INNER {
                lr.sample(rng, r);
                if op.lift_right(xlc, r, xrl) && g.contains(xrl) {
                    left_hits += 1;
                }
                rr.sample(rng, sc);
                if op.push_left(xc, sc, xlr) && f.contains(xlr) {
                    right_hits += 1;
                }
            }
            (left_hits as f64 / TTT_INNER as f64) * (right_hits as f64 / TTT_INNER as f64)
        },
    )?;
    Ok(est.scale(scale))
}

#[derive(Clone, Debug)]
pub struct TttCheck {
    /// `((1/3) ∫_G T χ_F)³`.
    pub lhs: Estimate,
    /// `|F| |G| ∫ T_{GF} T*_{G'F'} T_{GF}`.
    pub rhs: Estimate,
    /// `rhs − lhs`.
    pub margin: f64,
    /// `sqrt(σ_lhs² + σ_rhs²)`.
    pub sigma: f64,
    pub holds: bool,
    pub refined: Option<RefinedPair>,
}

/// Combined standard error of [`check_generalized_ttt`] relative to the right side.
pub const TTT_REL_TARGET: f64 = 0.01;
/// Relative standard error of the bilinear form on the left side.
pub const TTT_FORM_REL_TARGET: f64 = 0.01;
/// Budget growth cap relative to the starting sample count.
pub const TTT_MAX_GROWTH: u64 = 8192;

/// Grows the budget until `excess(est) ≤ 1` for a nonzero estimate or the cap.
/// `excess` is the ratio of the error to what is allowed; the next budget is
/// predicted from it assuming `stderr ∝ n^{−1/2}`, and is at least double.
pub fn adaptive_until(
    cfg: &McConfig,
    mut run: impl FnMut(&McConfig) -> Result<Estimate>,
    excess: impl Fn(&Estimate) -> f64,
) -> Result<Estimate> {
    let cap = cfg.samples.saturating_mul(TTT_MAX_GROWTH);
    let mut c = *cfg;
    loop {
        let est = run(&c)?;
        let x = excess(&est);
        if (est.value != 0.0 && x <= 1.0) || c.samples >= cap {
            return Ok(est);
        }
        let predicted = if est.value != 0.0 && x.is_finite() { (c.samples as f64 * x * x * 1.1) as u64 } else { 0 };
        c.samples = predicted.max(2 * c.samples).min(cap);
    }
}

/// Grows the budget until `stderr ≤ target · max(|value|, floor)` or the cap.
pub fn adaptive(
    cfg: &McConfig,
    target: f64,
    floor: f64,
    run: impl FnMut(&McConfig) -> Result<Estimate>,
) -> Result<Estimate> {
    adaptive_until(cfg, run, |e| e.stderr / (target * e.value.abs().max(floor)))
}

/// Checks the refined three-fold bound with a margin of 4 combined standard
/// errors. The budget for the right side grows until the combined error is at
/// most 1% of it.
pub fn check_generalized_ttt(op: &AveragingOperator, f: &LatticeSet, g: &LatticeSet, cfg: &McConfig) -> Result<TttCheck> {
    check_dims(op, f, g)?;
    if f.is_empty() || g.is_empty() {
        let zero = Estimate::exact(0.0);
        return Ok(TttCheck { lhs: zero, rhs: zero, margin: 0.0, sigma: 0.0, holds: true, refined: None });
    }
    run_in_pool(cfg.workers, || {
        let inner = cfg.with_workers(0);
        let refined = refine(op, f, g)?;
        let b = adaptive(&inner, TTT_FORM_REL_TARGET, 0.0, |c| bilinear_form(op, f, g, c))?;
        let third = b.value / 3.0;
        let lhs = Estimate { value: third.powi(3), stderr: third * third * b.stderr, samples: b.samples };
        let fg = f.measure() * g.measure();
        let rhs = adaptive_until(
            &inner.reseeded(1),
            |c| Ok(ttt_form(op, f, g, &refined.f, &refined.g, c)?.scale(fg)),
            |e| e.stderr.hypot(lhs.stderr) / (TTT_REL_TARGET * e.value),
        )?;
        let margin = rhs.value - lhs.value;
        let sigma = lhs.stderr.hypot(rhs.stderr);
        Ok(TttCheck { lhs, rhs, margin, sigma, holds: margin >= -4.0 * sigma, refined: Some(refined) })
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwtRatio {
    pub value: f64,
    pub stderr: f64,
    /// Index of the pair attaining the maximum.
    pub argmax: usize,
}

/// `max ∫_G T χ_F / (|F|^{1/q_L} |G|^{1/q_R})` over the family.
pub fn rwt_constant(op: &AveragingOperator, family: &[SetPair], inv_q_l: f64, inv_q_r: f64, cfg: &McConfig) -> Result<RwtRatio> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty set family".into()));
    }
    let mut best = RwtRatio { value: f64::NEG_INFINITY, stderr: 0.0, argmax: 0 };
    for (idx, pair) in family.iter().enumerate() {
        let b = bilinear_form(op, &pair.f, &pair.g, &cfg.reseeded(idx as u64))?;
        let den = pair.f.measure().powf(inv_q_l) * pair.g.measure().powf(inv_q_r);
        if den == 0.0 {
            return Err(Error::EmptySet);
        }
        if b.value / den > best.value {
            best = RwtRatio { value: b.value / den, stderr: b.stderr / den, argmax: idx };
        }
    }
    Ok(best)
}

/// Lattice spacing of [`random_box_union_pair`].
pub const BOX_PAIR_SPACING: f64 = 0.25;

fn random_box<R: Rng + ?Sized>(rng: &mut R, center: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let half: Vec<f64> = center.iter().map(|_| rng.gen_range(0.3..0.8)).collect();
    (
        center.iter().zip(&half).map(|(c, h)| c - h).collect(),
        center.iter().zip(&half).map(|(c, h)| c + h).collect(),
    )
}

fn box_union(boxes: &[(Vec<f64>, Vec<f64>)]) -> Result<LatticeSet> {
    let dim = boxes[0].0.len();
    let lo: Vec<f64> = (0..dim).map(|k| boxes.iter().map(|b| b.0[k]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..dim).map(|k| boxes.iter().map(|b| b.1[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
    LatticeSet::from_region(&lo, &hi, BOX_PAIR_SPACING, |x| {
        boxes.iter().any(|(l, h)| x.iter().zip(l.iter().zip(h)).all(|(v, (a, b))| a <= v && v <= b))
    })
}

/// Unions of one to three random boxes. `F` sits near the origin; each box of
/// `G` is centered at a point `π_R(m)` with `π_L(m)` in a box of `F`, so the
/// pair interacts.
pub fn random_box_union_pair<R: Rng + ?Sized>(op: &AveragingOperator, rng: &mut R) -> Result<SetPair> {
    let (nl, nr) = (op.left_dim(), op.right_dim());
    let lr = op.left_region();
    let nf = rng.gen_range(1..=3);
    let f_boxes: Vec<_> = (0..nf)
        .map(|_| {
            let c: Vec<f64> = (0..nl).map(|_| rng.gen_range(-0.5..0.5)).collect();
            random_box(rng, &c)
        })
        .collect();
    let ng = rng.gen_range(1..=3);
    let mut g_boxes = Vec::with_capacity(ng);
    let mut r = vec![0.0; lr.dim()];
    let mut y = vec![0.0; nr];
    while g_boxes.len() < ng {
        let (lo, hi) = &f_boxes[rng.gen_range(0..nf)];
        let x: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..*b)).collect();
        lr.sample(rng, &mut r);
        if op.lift_right(&x, &r, &mut y) {
            g_boxes.push(random_box(rng, &y));
        }
    }
    Ok(SetPair { f: box_union(&f_boxes)?, g: box_union(&g_boxes)? })
}
