//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the libtest
//! harness so the lines are always printed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radon_core::complex_det::complex_block_det;
use radon_core::models::complex_pairs_respected;
use radon_core::triangle::{exponents_from_sublevel, mainpt};
use radon_core::{DimensionTriple, Geometry, Model, QuadraticModel, Rational, RationalPoint};
use radon_lab::{execute, ResultRecord, RunConfig, RunOptions};

type Check = Result<String, String>;

fn rp(xn: i64, xd: i64, yn: i64, yd: i64) -> RationalPoint {
    RationalPoint::from_ints(xn, xd, yn, yd)
}

fn dims(n_l: usize, n_r: usize, ell: usize) -> DimensionTriple {
    DimensionTriple::new(n_l, n_r, ell).unwrap()
}

fn run(json: &str) -> Result<ResultRecord, String> {
    let cfg = RunConfig::parse(json).map_err(|e| e.to_string())?;
    execute(&cfg, &RunOptions::default()).map(|(r, _, _)| r).map_err(|e| e.to_string())
}

fn metric(r: &ResultRecord, name: &str) -> f64 {
    r.metrics.iter().find(|m| m.name == name).and_then(|m| m.value).unwrap_or_else(|| panic!("metric {name}"))
}

fn exact(r: &ResultRecord, name: &str) -> String {
    r.metrics.iter().find(|m| m.name == name).and_then(|m| m.exact.clone()).unwrap_or_else(|| panic!("metric {name}"))
}

fn no_violations(r: &ResultRecord) -> Result<(), String> {
    if r.violations.is_empty() {
        Ok(())
    } else {
        Err(r.violations.join("; "))
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit_s as f64 {
        Ok(())
    } else {
        Err(format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64()))
    }
}

fn asym_vertex(d: i64) -> RationalPoint {
    rp(d + 1, d + 2, 2, d + 2)
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut cases = vec![
        (dims(5, 5, 3), rp(5, 8, 5, 8)),
        (dims(10, 10, 6), rp(5, 8, 5, 8)),
        (dims(8, 8, 5), rp(8, 13, 8, 13)),
    ];
    for d in 1..=6usize {
        cases.push((dims(2 * d, d + 1, d), asym_vertex(d as i64)));
    }
    for (d, want) in &cases {
        let got = mainpt(*d).map_err(|e| e.to_string())?;
        if got != *want {
            return Err(format!("{d}: {got} != {want}"));
        }
    }
    for (d, want) in [(dims(5, 5, 3), rp(5, 8, 3, 8)), (dims(8, 8, 5), rp(8, 13, 5, 13))] {
        let got = mainpt(d).unwrap().to_operator();
        if got != want {
            return Err(format!("operator vertex {got} != {want}"));
        }
    }
    within(start.elapsed(), 1)?;
    Ok(format!("{} vertices and 2 operator vertices exact", cases.len()))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let mut models = vec![Model::MaximalR5, Model::MaximalC5, Model::HarmonicR8];
    models.extend((1..=6).map(|d_r| Model::Asymmetric { d_r }));
    for m in &models {
        let se = m.sublevel_exponents().map_err(|e| e.to_string())?;
        let got = exponents_from_sublevel(&se, Rational::from_integer(0));
        let want = mainpt(m.dims()).unwrap();
        if got != want {
            return Err(format!("{}: {got} != {want}", m.id()));
        }
    }
    within(start.elapsed(), 1)?;
    Ok(format!("{} models reproduce their vertex", models.len()))
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let q = QuadraticModel::new(&[vec![vec![1.0, 0.5], vec![0.0, -2.0]], vec![vec![0.25, 1.0], vec![3.0, 0.0]]])
        .map_err(|e| e.to_string())?;
    let mut models = vec![Model::MaximalR5, Model::HarmonicR8, Model::MaximalC5, Model::Bilinear(q)];
    models.extend((1..=4).map(|d_r| Model::Asymmetric { d_r }));
    for model in &models {
        let geom = Geometry::for_model(model).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let mut v = |n: usize| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
            let (m_c, l, r) = (v(geom.ambient_dim()), v(geom.left_param_dim()), v(geom.right_param_dim()));
            let p = geom.triple(&m_c, &l, &r).map_err(|e| e.to_string())?;
            let (a, b) = geom.offsets(&p);
            let closed = model.k_closed_form(&a, &b).map_err(|e| e.to_string())?;
            let k = if *model == Model::MaximalC5 {
                geom.k_squared_filtered(&p, complex_pairs_respected).map_err(|e| e.to_string())?.sqrt()
            } else {
                geom.k_general(&p).map_err(|e| e.to_string())?
            };
            let rel = (k - closed).abs() / closed;
            if rel.is_nan() || rel > 1e-10 {
                return Err(format!("{}: K = {k}, closed form {closed}", model.id()));
            }
            worst = worst.max(rel);
        }
    }
    let mut worst_det: f64 = 0.0;
    for n in 1..=4 {
        for _ in 0..100 {
            let z: Vec<Vec<Complex64>> = (0..n)
                .map(|_| (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
                .collect();
            let (real, complex) = complex_block_det(&z);
            let rel = (real - complex).abs() / complex.max(1e-300);
            if rel > 1e-12 {
                return Err(format!("block determinant {real} vs {complex} at n = {n}"));
            }
            worst_det = worst_det.max(rel);
        }
    }
    within(start.elapsed(), 10)?;
    Ok(format!("max K rel error {worst:.1e}, max block det rel error {worst_det:.1e}"))
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let mut notes = Vec::new();
    for model in ["maximal_r5", "asymmetric:2"] {
        let r = run(&format!(r#"{{"experiment": "ttt", "model": "{model}", "pairs": 200, "seed": 4}}"#))?;
        no_violations(&r)?;
        let loose = metric(&r, "pairs_above_error_target");
        if loose > 0.0 {
            return Err(format!("{model}: {loose} pairs above 1% stderr"));
        }
        notes.push(format!("{model} max sigma/rhs {:.4}", metric(&r, "max_sigma_over_rhs")));
    }
    within(start.elapsed(), 600)?;
    Ok(format!("400 pairs, 0 violations; {}", notes.join(", ")))
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let mut notes = Vec::new();
    for family in ["maximal", "harmonic"] {
        let r = run(&format!(r#"{{"experiment": "marc", "params": "{family}", "budget": 1000, "seed": 5}}"#))?;
        no_violations(&r)?;
        if exact(&r, "homogeneity_exact") != "true" {
            return Err(format!("{family}: homogeneity"));
        }
        notes.push(format!("{family} max lhs/(C rhs) {:.3}", metric(&r, "max_lhs_over_c_rhs")));
    }
    within(start.elapsed(), 30)?;
    Ok(notes.join(", "))
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let r = run(r#"{"experiment": "sublevel", "seed": 6}"#)?;
    no_violations(&r)?;
    let slope = metric(&r, "alpha_slope");
    if (slope - 1.0).abs() > 0.1 {
        return Err(format!("alpha slope {slope}"));
    }
    within(start.elapsed(), 300)?;
    Ok(format!(
        "alpha slope {slope:.3}, strip max z {:.2}, maxq1 max ratio {:.3}, sublev01 max ratio {:.3}",
        metric(&r, "strip_max_z"),
        metric(&r, "maxq1_max_ratio"),
        metric(&r, "sublev01_random_max_ratio").max(metric(&r, "sublev01_adversarial_max_ratio"))
    ))
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let mut notes = Vec::new();
    for (model, expected, tol) in
        [("maximal_r5", [5.0, 3.0, 5.0], 0.05), ("asymmetric:2", [4.0, 2.0, 4.0], 0.05), ("harmonic_r8", [8.0, 5.0, 8.0], 0.08)]
    {
        let r = run(&format!(
            r#"{{"experiment": "knapp", "model": "{model}", "budget": 1000000, "epsilons": [0.125, 0.0625, 0.03125, 0.015625, 0.0078125], "seed": 7}}"#
        ))?;
        no_violations(&r)?;
        let got = [metric(&r, "slope_measF"), metric(&r, "slope_measG"), metric(&r, "slope_B")];
        for (g, e) in got.iter().zip(expected) {
            if (g - e).abs() > tol * e {
                return Err(format!("{model}: slopes {got:?}, expected {expected:?} within {}%", tol * 100.0));
            }
        }
        let model_v = Model::from_id(model).unwrap();
        let pts = radon_lab::experiments::default_points(&model_v);
        for (p, want) in pts.iter().zip(["consistent", "boundary", "violated"]) {
            let v = exact(&r, &format!("verdict[{p}]"));
            if v != want {
                return Err(format!("{model}: verdict at {p} is {v}, expected {want}"));
            }
        }
        notes.push(format!("{model} ({:.3}, {:.3}, {:.3})", got[0], got[1], got[2]));
    }
    within(start.elapsed(), 1800)?;
    Ok(notes.join(", "))
}

fn criterion_8() -> Check {
    let start = Instant::now();
    let r = run(r#"{"experiment": "bracket", "seed": 8}"#)?;
    no_violations(&r)?;
    let order = metric(&r, "quadratic_order");
    within(start.elapsed(), 20)?;
    Ok(format!("linear discrepancy {}, quadratic order {order:.3}", metric(&r, "linear_discrepancy")))
}

/// The record without wall time and worker count.
fn values(r: &ResultRecord) -> String {
    let mut v = serde_json::to_value(r).unwrap();
    v.as_object_mut().unwrap().remove("run");
    serde_json::to_string(&v).unwrap()
}

fn criterion_9() -> Check {
    let configs = [
        r#"{"experiment": "triangle", "model": "harmonic_r8"}"#,
        r#"{"experiment": "knapp", "model": "maximal_r5", "budget": 20000}"#,
        r#"{"experiment": "sublevel", "budget": 20000, "pairs": 5}"#,
        r#"{"experiment": "ttt", "model": "maximal_r5", "pairs": 3, "budget": 5000}"#,
        r#"{"experiment": "marc", "budget": 200}"#,
        r#"{"experiment": "bracket"}"#,
    ];
    for c in configs {
        let with_workers = |w: usize| {
            let mut v: serde_json::Value = serde_json::from_str(c).unwrap();
            v["workers"] = w.into();
            run(&v.to_string()).map(|r| values(&r))
        };
        let (a, b, c4) = (with_workers(1)?, with_workers(1)?, with_workers(4)?);
        if a != b {
            return Err(format!("{c}: two runs differ"));
        }
        if a != c4 {
            return Err(format!("{c}: 1 and 4 workers differ"));
        }
    }
    Ok(format!("{} experiments identical across runs and worker counts", configs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("exact vertices", criterion_1),
        ("exponent algebra", criterion_2),
        ("curvature equivalence", criterion_3),
        ("generalized TT*T", criterion_4),
        ("dyadic interpolation", criterion_5),
        ("sublevel suite", criterion_6),
        ("Knapp scaling", criterion_7),
        ("bracket and nondegeneracy", criterion_8),
        ("reproducibility", criterion_9),
    ];
    let only: Vec<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for (idx, (name, check)) in criteria.iter().enumerate() {
        let n = idx + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail} [{secs:.1} s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {why} [{secs:.1} s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
