//! One function per experiment kind.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radon_core::fixtures::{self, oracle, Fixture, FixtureStore, ORACLES};
use radon_core::incidence::IncidenceGeometry;
use radon_core::knapp::{self, default_eps, knapp_sweep, scaling_slopes, sharpness_verdict, Verdict};
use radon_core::marc::{apply_split, marc_explicit_constant, marc_lhs, marc_rhs, split_bounds, Split};
use radon_core::nondegeneracy::{one_param_spanning, two_param_spanning, Condition};
use radon_core::sublevel::{
    annulus_masses, ball_volume, ball_weighted_mass_3d, det2, mc_sublevel, strip_annulus_measure,
    weighted_mass_from_masses, MAXQ1_CONSTANT, SUBLEV01_CONSTANT,
};
use radon_core::triangle::{admissible_region, exponents_from_sublevel, mainpt, sharpness_criterion};
use radon_core::ttt::{check_generalized_ttt, random_box_union_pair, ttt_form};
use radon_core::{
    AveragingOperator, DyadicSeq, Exact, Geometry, LatticeSet, MarcParams, McConfig, Model, PolyVectorField, Poly,
    Rational, RationalPoint,
};

use crate::config::{parse_rational, Experiment, MarcFamily, RunConfig};
use crate::{LabError, Metric, Outcome, RunOptions, Series, Table};

pub const KNAPP_BUDGET: u64 = 1_000_000;
pub const SUBLEVEL_BUDGET: u64 = 1_000_000;
pub const SUBLEVEL_PAIRS: usize = 50;
pub const TTT_BUDGET: u64 = 20_000;
pub const TTT_PAIRS: usize = 20;
pub const MARC_PAIRS: u64 = 1000;
pub const BRACKET_POINTS: usize = 50;
/// Smallest per-oracle budget `oracle-refresh` accepts.
pub const ORACLE_FLOOR: u64 = 100_000;
/// Margin of every Monte Carlo comparison, in combined standard errors.
pub const SIGMAS: f64 = 4.0;

pub fn dispatch(cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome, LabError> {
    match cfg.experiment {
        Experiment::Triangle => triangle(cfg),
        Experiment::Knapp => knapp(cfg, &opts.store()),
        Experiment::Sublevel => sublevel(cfg, &opts.store()),
        Experiment::Ttt => ttt(cfg, &opts.store()),
        Experiment::Marc => marc(cfg, &opts.store()),
        Experiment::Bracket => bracket(cfg),
        Experiment::OracleRefresh => oracle_refresh(cfg, opts),
    }
}

fn model_of(cfg: &RunConfig) -> Result<Model, LabError> {
    Ok(Model::from_id(cfg.model.as_deref().unwrap_or("maximal_r5"))?)
}

fn mc(cfg: &RunConfig, samples: u64, salt: u64) -> McConfig {
    McConfig::new(samples, cfg.seed).reseeded(salt).with_workers(cfg.workers)
}

fn rng(cfg: &RunConfig, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    r.set_stream(stream);
    r
}

fn f(v: f64) -> String {
    format!("{v}")
}

/// Compares an estimate against a stored fixture, recording a violation on
/// disagreement beyond [`SIGMAS`].
fn fixture_check(out: &mut Outcome, fx: &Fixture, est: &radon_core::Estimate, name: &str, units: &str, seed: u64) {
    out.metrics.push(Metric::estimate(name, est, units, seed).with_fixture(fx));
    if !fx.agrees(est, SIGMAS) {
        out.violations.push(format!("{name}: {} differs from fixture {} ± {}", est.value, fx.value, fx.stderr));
    }
}

pub fn triangle(cfg: &RunConfig) -> Result<Outcome, LabError> {
    let model = model_of(cfg)?;
    let d = model.dims();
    let v = mainpt(d)?;
    let region = admissible_region(d)?;
    let mut out = Outcome { table: Table::new(&["point", "x", "y"]), ..Default::default() };
    out.metrics.push(Metric::exact("dims", format!("{},{},{}", d.n_l(), d.n_r(), d.ell()), "(n_L,n_R,ell)"));
    out.metrics.push(Metric::exact("vertex", v, "(1/q_L,1/q_R)"));
    out.metrics.push(Metric::exact("operator_vertex", v.to_operator(), "(1/p,1/q)"));
    out.metrics.push(Metric::exact("knapp_left_through_vertex", region.knapp_left.on_line(v), "bool"));
    out.metrics.push(Metric::exact("knapp_right_through_vertex", region.knapp_right.on_line(v), "bool"));
    let half = RationalPoint::from_ints(1, 2, 1, 2);
    out.metrics.push(Metric::exact("contains_half_half", region.triangle.contains(half), "bool"));
    if !region.knapp_left.on_line(v) || !region.knapp_right.on_line(v) {
        out.violations.push("vertex is off a Knapp line".into());
    }
    if let Ok(se) = model.sublevel_exponents() {
        let sv = exponents_from_sublevel(&se, Rational::from_integer(0));
        out.metrics.push(Metric::exact("sublevel_exponents", format!("s={},p_l={},p_r={}", se.s, se.p_l, se.p_r), "exponents"));
        out.metrics.push(Metric::exact("sublevel_vertex", sv, "(1/q_L,1/q_R)"));
        out.metrics.push(Metric::exact("sharpness_criterion", sharpness_criterion(&se, d), "bool"));
        if sv != v {
            out.violations.push(format!("sublevel vertex {sv} differs from {v}"));
        }
    }
    for (name, p) in [
        ("(1,0)", RationalPoint::from_ints(1, 1, 0, 1)),
        ("(0,1)", RationalPoint::from_ints(0, 1, 1, 1)),
        ("vertex", v),
        ("operator_vertex", v.to_operator()),
    ] {
        out.table.push(vec![name.into(), p.x.to_string(), p.y.to_string()]);
    }
    Ok(out)
}

/// Interior, boundary and exterior exponent points for the Knapp verdicts.
pub fn default_points(model: &Model) -> Vec<RationalPoint> {
    let d = model.dims();
    let half = Rational::new(1, 2);
    let boundary_x = Rational::from_integer(1) - Rational::new(d.ell() as i64, 2 * d.n_l() as i64);
    vec![RationalPoint::new(half, half), RationalPoint::new(boundary_x, half), RationalPoint::from_ints(3, 4, 3, 4)]
}

pub fn knapp(cfg: &RunConfig, store: &FixtureStore) -> Result<Outcome, LabError> {
    let model = model_of(cfg)?;
    let d = model.dims();
    let op = AveragingOperator::for_model(&model)?;
    let budget = cfg.budget.unwrap_or(KNAPP_BUDGET);
    let eps = cfg.epsilons.clone().unwrap_or_else(|| default_eps(&model));
    let fixture = if model == Model::MaximalR5 && eps.contains(&fixtures::KNAPP_FIXTURE_EPS) {
        Some(store.load("knapp_b_r5_eps4")?)
    } else {
        None
    };
    let sweep = knapp_sweep(&op, &eps, &mc(cfg, budget, 0))?;
    let slopes = scaling_slopes(&sweep)?;
    let mut out = Outcome {
        table: Table::new(&["model", "eps", "measF", "measG", "B", "stderrB", "seed"]),
        ..Default::default()
    };
    for p in &sweep {
        out.table.push(vec![model.id(), f(p.eps), f(p.meas_f), f(p.meas_g.value), f(p.b.value), f(p.b.stderr), cfg.seed.to_string()]);
    }
    out.metrics.push(Metric::exact("expected_slopes", format!("{},{},{}", d.n_l(), d.ell(), d.n_l()), "(|F|,|G|,B)"));
    for (name, s) in [("slope_measF", slopes.meas_f), ("slope_measG", slopes.meas_g), ("slope_B", slopes.b)] {
        let mut m = Metric::value(name, s.slope, "log2/log2");
        m.seed = Some(cfg.seed);
        m.samples = Some(budget);
        out.metrics.push(m);
        out.metrics.push(Metric::value(format!("{name}_r2"), s.r2, "1"));
    }
    let points = match &cfg.points {
        Some(ps) => ps
            .iter()
            .map(|[x, y]| Ok(RationalPoint::new(parse_rational(x).unwrap(), parse_rational(y).unwrap())))
            .collect::<Result<Vec<_>, LabError>>()?,
        None => default_points(&model),
    };
    let region = admissible_region(d)?;
    for p in points {
        let rep = sharpness_verdict(d, p, &sweep)?;
        let tag = format!("[{p}]");
        out.metrics.push(Metric::exact(format!("verdict{tag}"), serde_json::to_value(rep.verdict).unwrap().as_str().unwrap(), "verdict"));
        out.metrics.push(Metric::value(format!("ratio_slope{tag}"), rep.ratio_slope, "log2/log2"));
        out.metrics.push(Metric::exact(format!("predicted_slope{tag}"), &rep.predicted_slope, "log2/log2"));
        if region.satisfies_constraints(p) && rep.verdict == Verdict::Violated {
            out.violations.push(format!("ratio grows at admissible point {p}"));
        }
    }
    if let Some(fx) = fixture {
        let idx = eps.iter().position(|e| *e == fixtures::KNAPP_FIXTURE_EPS).unwrap();
        fixture_check(&mut out, &fx, &sweep[idx].b, "B_r5_eps4", "volume", cfg.seed);
    }
    out.series = vec![
        Series::new("|F|", sweep.iter().map(|p| (p.eps, p.meas_f)).collect()),
        Series::new("|G|", sweep.iter().map(|p| (p.eps, p.meas_g.value)).collect()),
        Series::new("B", sweep.iter().map(|p| (p.eps, p.b.value)).collect()),
    ];
    Ok(out)
}

/// Lattice approximation of the planar annulus `A_i` at 32 cells per outer radius.
pub fn planar_annulus(i: i32) -> Result<LatticeSet, LabError> {
    let r = 2f64.powi(i);
    Ok(LatticeSet::from_region(&[-r, -r], &[r, r], r / 32.0, |x| {
        let n = x[0].hypot(x[1]);
        n >= r / 2.0 && n < r
    })?)
}

/// Aligned sector pair: `{u ∈ A_1 : |angle(u, ±e_1)| ≤ half_angle}`.
pub fn aligned_sector(half_angle: f64) -> Result<LatticeSet, LabError> {
    Ok(LatticeSet::from_region(&[-2.0, -2.0], &[2.0, 2.0], 1.0 / 32.0, |x| {
        let n = x[0].hypot(x[1]);
        n >= 1.0 && n < 2.0 && (x[1] / x[0]).atan().abs() <= half_angle
    })?)
}

/// Union of one to three random disks and boxes inside `[−2, 2]²`.
pub fn random_planar_set<R: Rng>(rng: &mut R) -> Result<LatticeSet, LabError> {
    let pieces: Vec<(bool, [f64; 2], f64)> = (0..rng.gen_range(1..=3))
        .map(|_| (rng.gen_bool(0.5), [rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2)], rng.gen_range(0.1..0.8)))
        .collect();
    Ok(LatticeSet::from_region(&[-2.0, -2.0], &[2.0, 2.0], 1.0 / 32.0, |x| {
        pieces.iter().any(|(disk, c, r)| {
            let (dx, dy) = (x[0] - c[0], x[1] - c[1]);
            if *disk {
                dx.hypot(dy) <= *r
            } else {
                dx.abs() <= *r && dy.abs() <= *r
            }
        })
    })?)
}

pub fn default_alphas() -> Vec<f64> {
    (1..=6).map(|k| 2f64.powi(-k)).collect()
}

/// Half-angle of the aligned sectors in the threshold sweep.
pub const SWEEP_HALF_ANGLE: f64 = PI / 4.0;

pub fn sublevel(cfg: &RunConfig, store: &FixtureStore) -> Result<Outcome, LabError> {
    let budget = cfg.budget.unwrap_or(SUBLEVEL_BUDGET);
    let alphas = cfg.alphas.clone().unwrap_or_else(default_alphas);
    let v_fx = store.load("strip_v_star")?;
    let w_fx = store.load("sublevel_w_star")?;
    let shell_fx = store.load("shell_ratio_sup")?;
    let mut out = Outcome { table: Table::new(&["alpha", "W", "stderr", "seed"]), ..Default::default() };
    let mut salt = 0u64;
    let mut next = || {
        salt += 1;
        salt
    };

    // strip areas against Monte Carlo
    let mut r = rng(cfg, 1);
    let (mut worst_z, mut strip_fail) = (0.0f64, 0usize);
    for _ in 0..20 {
        let r1 = r.gen_range(0.0..2.0);
        let r2 = r1 + r.gen_range(0.1..2.0);
        let w = r.gen_range(0.0..1.2 * r2);
        let exact = strip_annulus_measure(r1, r2, w)?;
        let est = fixtures::strip_mc(r1, r2, w, &mc(cfg, budget, next()))?;
        let z = (est.value - exact).abs() / est.stderr.max(f64::MIN_POSITIVE);
        worst_z = worst_z.max(z);
        if z > SIGMAS {
            strip_fail += 1;
        }
    }
    out.metrics.push(Metric::value("strip_max_z", worst_z, "stderr"));
    out.metrics.push(Metric::value("strip_failures", strip_fail as f64, "count"));
    if strip_fail > 0 {
        out.violations.push(format!("{strip_fail} strip areas off their Monte Carlo value"));
    }
    let (r1, r2, w) = fixtures::STRIP_PARAMS;
    let v_star = strip_annulus_measure(r1, r2, w)?;
    fixture_check(&mut out, &v_fx, &radon_core::Estimate::exact(v_star), "strip_v_star", "area", v_fx.seed);
    out.metrics.push(Metric::value("strip_v_star_over_w_r2", v_star / (w * r2), "1"));
    if v_star > MAXQ1_CONSTANT * w * r2 {
        out.violations.push("strip area exceeds 8 w r2".into());
    }

    // per-annulus bound
    let annuli: Vec<LatticeSet> = (-4..=2).map(planar_annulus).collect::<Result<_, _>>()?;
    let (mut worst, mut maxq_fail) = (0.0f64, 0usize);
    for (a, i) in (-4..=2).enumerate() {
        for (b, j) in (-4..=2).enumerate() {
            let (el, er) = (&annuli[a], &annuli[b]);
            let alpha = 2f64.powi(i + j) / 8.0;
            let est = mc_sublevel(det2, alpha, el, er, &mc(cfg, budget, next()))?;
            let bound = MAXQ1_CONSTANT
                * alpha
                * (2f64.powi(i - j) * er.measure()).min(2f64.powi(j - i) * el.measure());
            worst = worst.max(est.value / bound);
            if est.value > bound + SIGMAS * est.stderr {
                maxq_fail += 1;
            }
        }
    }
    out.metrics.push(Metric::value("maxq1_max_ratio", worst, "1"));
    out.metrics.push(Metric::value("maxq1_failures", maxq_fail as f64, "count"));
    if maxq_fail > 0 {
        out.violations.push(format!("{maxq_fail} per-annulus bounds fail"));
    }

    // end-to-end bound on adversarial and random pairs
    let mut checks: Vec<(LatticeSet, LatticeSet, f64)> = Vec::new();
    for k in 2..=5 {
        let s = aligned_sector(2f64.powi(-k))?;
        checks.push((s.clone(), s, 2f64.powi(-k)));
    }
    for (a, i) in (-4..=2).enumerate().step_by(2) {
        checks.push((annuli[a].clone(), annuli[a].clone(), 4f64.powi(i) / 16.0));
    }
    let n_adv = checks.len();
    let mut r = rng(cfg, 2);
    for _ in 0..cfg.pairs.unwrap_or(SUBLEVEL_PAIRS) {
        let (el, er) = (random_planar_set(&mut r)?, random_planar_set(&mut r)?);
        let alpha = 2f64.powf(r.gen_range(-6.0..0.0));
        checks.push((el, er, alpha));
    }
    let (mut worst, mut fails) = ([0.0f64; 2], 0usize);
    for (idx, (el, er, alpha)) in checks.iter().enumerate() {
        let est = mc_sublevel(det2, *alpha, el, er, &mc(cfg, budget, next()))?;
        let bound = SUBLEV01_CONSTANT * alpha * (el.measure() * er.measure()).sqrt();
        let slot = usize::from(idx >= n_adv);
        worst[slot] = worst[slot].max(est.value / bound);
        if est.value > bound + SIGMAS * est.stderr {
            fails += 1;
        }
    }
    out.metrics.push(Metric::value("sublev01_adversarial_max_ratio", worst[0], "1"));
    out.metrics.push(Metric::value("sublev01_random_max_ratio", worst[1], "1"));
    out.metrics.push(Metric::value("sublev01_failures", fails as f64, "count"));
    if fails > 0 {
        out.violations.push(format!("{fails} sublevel bounds fail"));
    }

    // threshold sweep
    let sector = aligned_sector(SWEEP_HALF_ANGLE)?;
    let mut sweep = Vec::new();
    for &alpha in &alphas {
        let seed_salt = next();
        let est = mc_sublevel(det2, alpha, &sector, &sector, &mc(cfg, budget, seed_salt))?;
        out.table.push(vec![f(alpha), f(est.value), f(est.stderr), cfg.seed.to_string()]);
        sweep.push((alpha, est.value));
    }
    let xs: Vec<f64> = sweep.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = sweep.iter().map(|p| p.1).collect();
    let fit = knapp::log_log_fit(&xs, &ys)?;
    out.metrics.push(Metric::value("alpha_slope", fit.slope, "log2/log2"));
    out.series.push(Series::new("W(alpha)", sweep));

    // disk fixture
    let o = oracle("sublevel_w_star").expect("registered");
    let disk = fixtures::unit_disk()?;
    let rc = o.run_config().with_workers(cfg.workers);
    let w = mc_sublevel(det2, fixtures::DISK_ALPHA, &disk, &disk, &rc)?;
    fixture_check(&mut out, &w_fx, &w, "sublevel_w_star", "volume", rc.seed);

    // annulus masses and the weighted mass ratio in R^3
    let a3 = LatticeSet::from_region(&[-8.0; 3], &[8.0; 3], 0.25, |x| {
        let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        (4.0..8.0).contains(&n)
    })?;
    let masses = annulus_masses(&a3)?;
    let shell = 4.0 * PI / 3.0 * (512.0 - 64.0);
    out.metrics.push(Metric::value("a3_mass_rel_error", (masses.get(3) - shell).abs() / shell, "1"));
    out.metrics.push(Metric::value("a3_spillover", (masses.l1() - masses.get(3)) / shell, "1"));
    let mut ball_max: f64 = 0.0;
    for i0 in -6..=2 {
        let r = 2f64.powi(i0);
        ball_max = ball_max.max(ball_weighted_mass_3d(r).sqrt() / ball_volume(3, r).cbrt());
    }
    let a5 = DyadicSeq::spike(5, 4.0 * PI / 3.0 * (32768.0 - 4096.0));
    let shell_ratio = weighted_mass_from_masses(&a5).ratio;
    out.metrics.push(Metric::value("ball_ratio_max", ball_max, "1").with_fixture(&shell_fx));
    out.metrics.push(Metric::value("shell_a5_ratio", shell_ratio, "1").with_fixture(&shell_fx));
    if ball_max > shell_fx.value * (1.0 + 1e-12) || shell_ratio > shell_fx.value {
        out.violations.push("weighted mass ratio above its supremum".into());
    }
    Ok(out)
}

pub fn ttt(cfg: &RunConfig, store: &FixtureStore) -> Result<Outcome, LabError> {
    let model = model_of(cfg)?;
    let op = AveragingOperator::for_model(&model)?;
    let budget = cfg.budget.unwrap_or(TTT_BUDGET);
    let fixture = if model == Model::MaximalR5 { Some(store.load("ttt_r5_pair")?) } else { None };
    let mut out = Outcome {
        table: Table::new(&["pair", "measF", "measG", "lhs", "rhs", "sigma", "holds"]),
        ..Default::default()
    };
    let mut r = rng(cfg, 3);
    let (mut fails, mut min_ratio, mut max_rel, mut loose) = (0usize, f64::INFINITY, 0.0f64, 0usize);
    let mut pts = Vec::new();
    for idx in 0..cfg.pairs.unwrap_or(TTT_PAIRS) {
        let pair = random_box_union_pair(&op, &mut r)?;
        let c = check_generalized_ttt(&op, &pair.f, &pair.g, &mc(cfg, budget, idx as u64))?;
        out.table.push(vec![
            idx.to_string(),
            f(pair.f.measure()),
            f(pair.g.measure()),
            f(c.lhs.value),
            f(c.rhs.value),
            f(c.sigma),
            c.holds.to_string(),
        ]);
        if !c.holds {
            fails += 1;
        }
        let rel = c.sigma / c.rhs.value;
        if rel > radon_core::ttt::TTT_REL_TARGET {
            loose += 1;
        }
        max_rel = max_rel.max(rel);
        min_ratio = min_ratio.min(c.rhs.value / c.lhs.value);
        pts.push((c.lhs.value, c.rhs.value));
    }
    out.metrics.push(Metric::value("ttt_failures", fails as f64, "count"));
    out.metrics.push(Metric::value("min_rhs_over_lhs", min_ratio, "1"));
    out.metrics.push(Metric::value("max_sigma_over_rhs", max_rel, "1"));
    out.metrics.push(Metric::value("pairs_above_error_target", loose as f64, "count"));
    if fails > 0 {
        out.violations.push(format!("{fails} pairs violate the three-fold bound"));
    }
    if loose > 0 {
        out.warnings.push(format!("{loose} pairs did not reach the error target"));
    }
    if let Some(fx) = fixture {
        let o = oracle("ttt_r5_pair").expect("registered");
        let (op, pair, refined) = fixtures::ttt_fixture_pair()?;
        let rc = o.run_config().with_workers(cfg.workers);
        let est = ttt_form(&op, &pair.f, &pair.g, &refined.f, &refined.g, &rc)?;
        fixture_check(&mut out, &fx, &est, "ttt_r5_pair", "volume^3", rc.seed);
    }
    out.series.push(Series::new("rhs vs lhs", pts));
    Ok(out)
}

/// Random nonnegative sequence with one to ten entries in `[−20, 20]`.
pub fn random_dyadic<R: Rng>(rng: &mut R) -> DyadicSeq {
    let mut s = DyadicSeq::new();
    for _ in 0..rng.gen_range(1..=10) {
        s.set(rng.gen_range(-20..=20), 10f64.powf(rng.gen_range(-3.0..3.0)));
    }
    s
}

pub fn marc_params(family: MarcFamily, alpha: f64) -> MarcParams {
    match family {
        MarcFamily::Maximal => MarcParams::maximal(alpha),
        MarcFamily::Harmonic => MarcParams::harmonic(alpha),
    }
}

pub fn marc(cfg: &RunConfig, store: &FixtureStore) -> Result<Outcome, LabError> {
    let family = cfg.params.unwrap_or(MarcFamily::Maximal);
    let alpha = cfg.alphas.as_ref().map_or(1.0, |a| a[0]);
    let params = marc_params(family, alpha);
    let fx = store.load(match family {
        MarcFamily::Maximal => "marc_c_max",
        MarcFamily::Harmonic => "marc_c_harm",
    })?;
    let c = marc_explicit_constant(&params)?;
    let mut out = Outcome { table: Table::new(&["pair", "lhs", "rhs", "ratio"]), ..Default::default() };
    fixture_check(&mut out, &fx, &radon_core::Estimate::exact(c), "explicit_constant", "1", 0);

    let mut r = rng(cfg, 4);
    let (mut worst, mut fails) = (0.0f64, 0usize);
    let mut pts = Vec::new();
    for idx in 0..cfg.budget.unwrap_or(MARC_PAIRS) {
        let (fs, gs) = (random_dyadic(&mut r), random_dyadic(&mut r));
        let lhs = marc_lhs(&params, &fs, &gs);
        let rhs = marc_rhs(&params, &fs, &gs)?;
        let ratio = lhs / (c * rhs);
        out.table.push(vec![idx.to_string(), f(lhs), f(rhs), f(ratio)]);
        worst = worst.max(ratio);
        if ratio > 1.0 {
            fails += 1;
        }
        pts.push((rhs, lhs));
    }
    out.metrics.push(Metric::value("max_lhs_over_c_rhs", worst, "1"));
    out.metrics.push(Metric::value("marc_failures", fails as f64, "count"));
    if fails > 0 {
        out.violations.push(format!("{fails} pairs exceed C times the right side"));
    }

    // disk annulus masses
    let disk = fixtures::unit_disk()?;
    let m = annulus_masses(&disk)?;
    let ratio = marc_lhs(&params, &m, &m) / (c * marc_rhs(&params, &m, &m)?);
    out.metrics.push(Metric::value("disk_lhs_over_c_rhs", ratio, "1"));
    if ratio > 1.0 {
        out.violations.push("disk masses exceed the bound".into());
    }

    // exact homogeneity; powers of 4 keep the square roots exact
    let (fs, gs) = (random_dyadic(&mut r), random_dyadic(&mut r));
    let homogeneous = [0.25, 4.0, 16.0].iter().all(|&l| {
        let scaled = params.with_constants(l * params.big_a[0], l * params.big_a[1]);
        marc_lhs(&scaled, &fs, &gs) == l * marc_lhs(&params, &fs, &gs)
            && marc_rhs(&scaled, &fs, &gs).ok() == marc_rhs(&params, &fs, &gs).ok().map(|v| l * v)
    });
    out.metrics.push(Metric::exact("homogeneity_exact", homogeneous, "bool"));
    if !homogeneous {
        out.violations.push("marc sides are not exactly homogeneous".into());
    }

    // split operator bounds
    let mut t_fail = 0usize;
    for _ in 0..100 {
        let e = random_dyadic(&mut r);
        let s = r.gen_range(0.0..1.0);
        for split in [Split::Lower, Split::Upper] {
            let (inf_b, l1_b) = split_bounds(&params, split)?;
            let te = apply_split(&params, split, s, &e, -80, 80)?;
            let t_inf = te.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let t_l1: f64 = te.iter().map(|v| v.abs()).sum();
            if t_inf > inf_b * e.linf() * (1.0 + 1e-12) || t_l1 > l1_b * e.l1() * (1.0 + 1e-12) {
                t_fail += 1;
            }
        }
    }
    out.metrics.push(Metric::value("split_bound_failures", t_fail as f64, "count"));
    if t_fail > 0 {
        out.violations.push(format!("{t_fail} split operator bounds fail"));
    }
    out.series.push(Series::new("lhs vs rhs", pts));
    Ok(out)
}

/// Vector field with quadratic coefficients `Σ_m (z_a z_b) ∂_m` on `R^n`.
pub fn quadratic_field(n: usize) -> PolyVectorField<f64> {
    let entries = (0..n)
        .map(|m| {
            let (a, b) = (m % n, (m + 1) % n);
            (m, Poly::term(n, 1.0 + m as f64 / 4.0, &[(a, 1), (b, 1)]))
        })
        .collect();
    PolyVectorField::from_sparse(n, entries)
}

pub fn bracket(cfg: &RunConfig) -> Result<Outcome, LabError> {
    let mut out = Outcome { table: Table::new(&["h", "discrepancy"]), ..Default::default() };
    let mut r = rng(cfg, 5);
    let geom = Geometry::for_model(&Model::MaximalR5)?;
    let frames = geom.frames();
    let mut fails = [0usize; 2];
    for _ in 0..BRACKET_POINTS {
        let p: Vec<f64> = (0..7).map(|_| r.gen_range(-1.0..1.0)).collect();
        let v = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let v2 = [-v[1] + r.gen_range(-0.5..0.5), v[0] + r.gen_range(-0.5..0.5)];
        for (k, cond) in [Condition::First, Condition::Second].into_iter().enumerate() {
            if !two_param_spanning(frames, &p, v, v2, cond)?.holds {
                fails[k] += 1;
            }
        }
    }
    out.metrics.push(Metric::value("two_param_first_failures", fails[0] as f64, "count"));
    out.metrics.push(Metric::value("two_param_second_failures", fails[1] as f64, "count"));
    let mut one_param = 0usize;
    for d in [2usize, 3] {
        let g = Geometry::for_model(&Model::Asymmetric { d_r: d })?;
        for _ in 0..BRACKET_POINTS {
            let p: Vec<f64> = (0..g.ambient_dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
            if !one_param_spanning(g.frames(), &p)? {
                one_param += 1;
            }
        }
    }
    out.metrics.push(Metric::value("one_param_failures", one_param as f64, "count"));
    if fails.iter().sum::<usize>() + one_param > 0 {
        out.violations.push("spanning condition fails at sampled points".into());
    }

    // linear case: exact arithmetic, discrepancy must vanish
    let q = radon_core::QuadraticModel::new(&[
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![vec![0.0, -1.0], vec![1.0, 0.0]],
    ])?;
    let eg = IncidenceGeometry::<Exact>::bilinear(&q)?;
    let ex = |n: i64, d: i64| Exact::new(n.into(), d.into());
    let mut worst_linear = 0.0f64;
    for j in 0..2 {
        for dir in 0..2 {
            let m_c: Vec<Exact> = [(1, 3), (-2, 5), (3, 7), (1, 2), (-1, 4), (2, 9)].iter().map(|&(n, d)| ex(n, d)).collect();
            let p = eg.triple(&m_c, &[ex(1, 5), ex(-3, 4)], &[ex(2, 3), ex(1, 8)])?;
            let v = eg.frames().right[j].clone();
            let chk = eg.bracket_transport_check(&p, &v, dir, ex(1, 16))?;
            worst_linear = worst_linear.max(chk.discrepancy);
        }
    }
    out.metrics.push(Metric::value("linear_discrepancy", worst_linear, "1"));
    if worst_linear != 0.0 {
        out.violations.push("linear transport discrepancy is nonzero".into());
    }

    // quadratic coefficients: first-order convergence
    let v = quadratic_field(geom.ambient_dim());
    let p = geom.convolution_triple(&[0.2, -0.1, 0.3, 0.05, -0.2], &[0.4, -0.3], &[0.1, 0.2], &[-0.2, 0.5])?;
    let mut pts = Vec::new();
    for k in 4..=10 {
        let h = 2f64.powi(-k);
        let d = geom.bracket_transport_check(&p, &v, 0, h)?.discrepancy;
        out.table.push(vec![f(h), f(d)]);
        pts.push((h, d));
    }
    let fit = knapp::log_log_fit(&pts.iter().map(|p| p.0).collect::<Vec<_>>(), &pts.iter().map(|p| p.1).collect::<Vec<_>>())?;
    out.metrics.push(Metric::value("quadratic_order", fit.slope, "log2/log2"));
    if fit.slope < 0.9 {
        out.violations.push(format!("transport convergence order {} below 0.9", fit.slope));
    }
    out.series.push(Series::new("discrepancy(h)", pts));
    Ok(out)
}

pub fn oracle_refresh(cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome, LabError> {
    if let Some(b) = cfg.budget {
        if b < ORACLE_FLOOR {
            return Err(LabError::Config { line: 1, message: format!("oracle budget {b} is below the floor {ORACLE_FLOOR}") });
        }
    }
    let store = opts.store();
    let mut out = Outcome { table: Table::new(&["name", "value", "stderr", "seed", "samples", "hash"]), ..Default::default() };
    let mut fresh = Vec::new();
    for o in ORACLES.iter() {
        let mut c = o.oracle_config().with_workers(cfg.workers);
        if let (Some(b), true) = (cfg.budget, o.run_samples > 0) {
            c.samples = b;
        }
        let est = o.compute(&c)?;
        let fx = Fixture::new(o.name, est, o.seed);
        if let Some(old) = store.load_raw(o.name) {
            let mismatch = !old.is_intact() || old.hash != fx.hash;
            if mismatch && !opts.force {
                return Err(LabError::HashMismatch(format!(
                    "fixture `{}` in {} differs from the recomputed value (stored hash {}, new {}); rerun with --force",
                    o.name,
                    store.dir().display(),
                    old.hash,
                    fx.hash
                )));
            }
        }
        fresh.push(fx);
    }
    let copy_dir = cfg.output_dir().join("fixtures");
    let copies = FixtureStore::new(&copy_dir);
    for fx in &fresh {
        store.save(fx)?;
        copies.save(fx)?;
        out.metrics.push(Metric::estimate(&fx.name, &fx.estimate(), "fixture", fx.seed).with_fixture(fx));
        out.table.push(vec![fx.name.clone(), f(fx.value), f(fx.stderr), fx.seed.to_string(), fx.samples.to_string(), fx.hash.clone()]);
    }
    Ok(out)
}
