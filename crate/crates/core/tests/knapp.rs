use std::f64::consts::PI;

use radon_core::knapp::{
    default_eps, knapp_sets, knapp_sweep, scaling_slopes, sharpness_verdict, slope_fit, KnappPoint, Tube, Verdict,
};
use radon_core::{AveragingOperator, Estimate, McConfig, Model, ParamRegion, RationalPoint};

fn synthetic(slopes: [f64; 3]) -> Vec<KnappPoint> {
    (3..=7)
        .map(|j| {
            let eps = 2f64.powi(-j);
            KnappPoint {
                eps,
                meas_f: eps.powf(slopes[0]),
                meas_g: Estimate::exact(3.0 * eps.powf(slopes[1])),
                b: Estimate::exact(0.5 * eps.powf(slopes[2])),
            }
        })
        .collect()
}

#[test]
fn slope_fit_recovers_exact_powers() {
    let xs = [0.5, 0.25, 0.125, 0.0625];
    let ys: Vec<f64> = xs.iter().map(|x: &f64| 7.0 * x.powf(2.5)).collect();
    let f = slope_fit(&xs, &ys).unwrap();
    assert!((f.slope - 2.5).abs() < 1e-12);
    assert!((f.intercept - 7f64.log2()).abs() < 1e-12);
    assert!((f.r2 - 1.0).abs() < 1e-12);
}

#[test]
fn slope_fit_guards() {
    assert!(slope_fit(&[0.5, 0.25, 0.125], &[1.0, 2.0, 3.0]).is_err());
    assert!(slope_fit(&[0.5, 0.25, 0.125, 0.1], &[1.0, 0.0, 3.0, 1.0]).is_err());
    assert!(slope_fit(&[0.5, 0.5, 0.5, 0.5], &[1.0, 2.0, 3.0, 1.0]).is_err());
}

#[test]
fn verdicts_on_an_exact_sweep() {
    // ratio slope is n_L − n_L x − ℓ y for slopes (n_L, ℓ, n_L)
    let m = Model::MaximalR5;
    let pts = synthetic([5.0, 3.0, 5.0]);
    let s = scaling_slopes(&pts).unwrap();
    assert!((s.meas_g.slope - 3.0).abs() < 1e-12);
    let cases = [
        (RationalPoint::from_ints(1, 2, 1, 2), Verdict::Consistent, 1.0),
        (RationalPoint::from_ints(7, 10, 1, 2), Verdict::Boundary, 0.0),
        (RationalPoint::from_ints(3, 4, 3, 4), Verdict::Violated, -1.0),
        (RationalPoint::from_ints(5, 8, 5, 8), Verdict::Boundary, 0.0),
    ];
    for (p, v, slope) in cases {
        let r = sharpness_verdict(m.dims(), p, &pts).unwrap();
        assert_eq!(r.verdict, v, "{p}");
        assert!((r.ratio_slope - slope).abs() < 1e-9, "{p}: {}", r.ratio_slope);
        assert_eq!(r.predicted_slope.parse::<f64>().unwrap_or_else(|_| {
            let (n, d) = r.predicted_slope.split_once('/').unwrap();
            n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap()
        }), slope);
    }
}

#[test]
fn knapp_scale_guards() {
    let op = AveragingOperator::for_model(&Model::MaximalR5).unwrap();
    assert!(knapp_sets(&op, 0.5).is_err());
    assert!(knapp_sets(&op, 0.0).is_err());
    let cfg = McConfig::new(1000, 0);
    assert!(knapp_sweep(&op, &[0.0625, 0.125, 0.03125, 0.015625], &cfg).is_err());
    let product = AveragingOperator::product(ParamRegion::cube(2, -1.0, 1.0), ParamRegion::cube(2, -1.0, 1.0));
    assert!(Tube::new(&product, 0.125).is_err());
}

#[test]
fn default_scales() {
    assert_eq!(default_eps(&Model::MaximalR5).len(), 5);
    assert_eq!(default_eps(&Model::Asymmetric { d_r: 2 }).len(), 5);
    assert!(default_eps(&Model::MaximalR5).windows(2).all(|w| w[1] == w[0] / 2.0));
}

#[test]
fn flat_tube_is_a_stadium() {
    // asymmetric d_R = 1: a segment of length 1 in the plane, so the union of
    // grid disks is within a scallop of the stadium 2ρ + πρ²
    let op = AveragingOperator::for_model(&Model::Asymmetric { d_r: 1 }).unwrap();
    for eps in [0.125, 0.0625] {
        let t = Tube::new(&op, eps).unwrap();
        let rho = t.radius();
        let stadium = 2.0 * rho + PI * rho * rho;
        let est = t.measure(&McConfig::new(200_000, 5)).unwrap();
        assert!((est.value - stadium).abs() <= 0.01 * stadium + 4.0 * est.stderr, "{eps}: {est:?} vs {stadium}");
        assert!(t.contains_point(&[0.1, 0.5 * rho]));
        assert!(!t.contains_point(&[0.1, 1.5 * rho]));
        assert!(t.coverage(&[0.0, 0.0]) >= 1);
        assert_eq!(t.coverage(&[0.0, 2.0 * rho]), 0);
    }
}

#[test]
fn asymmetric_sweep_scales() {
    let model = Model::Asymmetric { d_r: 2 };
    let op = AveragingOperator::for_model(&model).unwrap();
    let pts = knapp_sweep(&op, &default_eps(&model), &McConfig::new(100_000, 2)).unwrap();
    let s = scaling_slopes(&pts).unwrap();
    assert!((s.meas_f.slope - 4.0).abs() < 0.05);
    assert!((s.meas_g.slope - 2.0).abs() < 0.1, "{}", s.meas_g.slope);
    assert!((s.b.slope - 4.0).abs() < 0.2, "{}", s.b.slope);
}
