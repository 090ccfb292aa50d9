use std::f64::consts::PI;

use proptest::prelude::*;

use radon_core::marc::{apply_split, marc_explicit_constant, marc_lhs, marc_rhs, split_bounds, Split};
use radon_core::sublevel::{
    annulus_index, annulus_masses, ball_weighted_mass_3d, det2, mc_sublevel, strip_annulus_measure, strip_disk_area,
    weighted_mass_bound_3d, weighted_mass_sup_3d,
};
use radon_core::{DyadicSeq, LatticeSet, MarcParams, McConfig};

fn dyadic() -> impl Strategy<Value = DyadicSeq> {
    prop::collection::vec((-15i32..=15, -3.0f64..3.0), 1..8).prop_map(|entries| {
        let mut s = DyadicSeq::new();
        for (i, e) in entries {
            s.set(i, 10f64.powf(e));
        }
        s
    })
}

fn params() -> impl Strategy<Value = MarcParams> {
    prop_oneof![Just(MarcParams::maximal(1.0)), Just(MarcParams::harmonic(1.0))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn interpolation_bound_holds(p in params(), f in dyadic(), g in dyadic()) {
        let c = marc_explicit_constant(&p).unwrap();
        prop_assert!(marc_lhs(&p, &f, &g) <= c * marc_rhs(&p, &f, &g).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn sides_are_homogeneous_in_the_constants(p in params(), f in dyadic(), g in dyadic(), k in -4i32..4) {
        // powers of 4 keep A_0^{1−θ} A_1^θ exact at θ = 1/2
        let lam = 4f64.powi(k);
        let q = p.with_constants(lam * p.big_a[0], lam * p.big_a[1]);
        prop_assert_eq!(marc_lhs(&q, &f, &g), lam * marc_lhs(&p, &f, &g));
        prop_assert_eq!(marc_rhs(&q, &f, &g).unwrap(), lam * marc_rhs(&p, &f, &g).unwrap());
    }

    #[test]
    fn split_operators_obey_their_bounds(p in params(), e in dyadic(), s in 0.0f64..1.0) {
        for split in [Split::Lower, Split::Upper] {
            let (inf_b, l1_b) = split_bounds(&p, split).unwrap();
            let te = apply_split(&p, split, s, &e, -60, 60).unwrap();
            let t_inf = te.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let t_l1: f64 = te.iter().map(|v| v.abs()).sum();
            prop_assert!(t_inf <= inf_b * e.linf() * (1.0 + 1e-12));
            prop_assert!(t_l1 <= l1_b * e.l1() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn strip_area_matches_quadrature(r1 in 0.0f64..2.0, dr in 0.05f64..2.0, w in 0.0f64..3.0) {
        let r2 = r1 + dr;
        // Simpson on ∫_{−w}^{w} 2 sqrt(r² − y²) dy for each radius
        let disk = |r: f64| {
            let h = w.min(r);
            let n = 4000;
            let f = |y: f64| 2.0 * (r * r - y * y).max(0.0).sqrt();
            let dx = 2.0 * h / n as f64;
            let mut s = f(-h) + f(h);
            for k in 1..n {
                s += f(-h + k as f64 * dx) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * dx / 3.0
        };
        let exact = strip_annulus_measure(r1, r2, w).unwrap();
        prop_assert!((exact - (disk(r2) - disk(r1))).abs() <= 1e-4 * (1.0 + exact));
        prop_assert!(exact <= 8.0 * w * r2 + 1e-12);
    }
}

#[test]
fn explicit_constants() {
    for p in [MarcParams::maximal(1.0), MarcParams::harmonic(1.0)] {
        let c = marc_explicit_constant(&p).unwrap();
        assert!((c - 4.0).abs() < 1e-12, "{c}");
    }
}

#[test]
fn degenerate_parameters_are_rejected() {
    let inf = f64::INFINITY;
    assert!(MarcParams::new([1.0, 1.0], [-1.0, 1.0], [inf, inf], [1.0, inf], 0.5, [1.0, 1.0]).is_err());
    assert!(MarcParams::new([1.0, -1.0], [-1.0, 1.0], [inf, 1.0], [1.0, inf], 1.0, [1.0, 1.0]).is_err());
    assert!(MarcParams::new([1.0, -1.0], [-1.0, 1.0], [inf, 1.0], [1.0, inf], 0.5, [-1.0, 1.0]).is_err());
}

#[test]
fn strip_limits() {
    assert_eq!(strip_annulus_measure(1.0, 2.0, 0.0).unwrap(), 0.0);
    let full = strip_annulus_measure(1.0, 2.0, 5.0).unwrap();
    assert!((full - 3.0 * PI).abs() < 1e-12);
    assert!((strip_disk_area(1.0, 1.0) - PI).abs() < 1e-12);
    assert!(strip_annulus_measure(2.0, 1.0, 0.1).is_err());
    assert!(strip_annulus_measure(1.0, 2.0, -0.1).is_err());
}

#[test]
fn annulus_indexing() {
    assert_eq!(annulus_index(1.0), Some(1));
    assert_eq!(annulus_index(0.75), Some(0));
    assert_eq!(annulus_index(3.9), Some(2));
    assert_eq!(annulus_index(0.0), None);
}

#[test]
fn disk_annulus_masses_sum_to_the_measure() {
    let d = LatticeSet::ball(&[0.0, 0.0], 1.0, 1.0 / 128.0).unwrap();
    let m = annulus_masses(&d).unwrap();
    assert!((m.l1() - d.measure()).abs() <= 1e-9 * d.measure());
    // A_0 = {1/2 ≤ |x| < 1} carries three quarters of the disk
    assert!((m.get(0) / d.measure() - 0.75).abs() < 0.02);
}

#[test]
fn weighted_mass_supremum_bounds_balls_and_shells() {
    let sup = weighted_mass_sup_3d();
    for k in -20..=20 {
        let r = 1.37f64 * 2f64.powf(k as f64 / 5.0);
        let ratio = ball_weighted_mass_3d(r).sqrt() / (4.0 * PI / 3.0 * r * r * r).cbrt();
        assert!(ratio <= sup * (1.0 + 1e-9), "{r}: {ratio} > {sup}");
    }
    let shell = LatticeSet::from_region(&[-4.0; 3], &[4.0; 3], 0.125, |x| {
        let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        (2.0..4.0).contains(&n)
    })
    .unwrap();
    assert!(weighted_mass_bound_3d(&shell).unwrap().ratio <= sup);
}

#[test]
fn sublevel_of_disks_scales_linearly_for_small_alpha() {
    let d = LatticeSet::ball(&[0.0, 0.0], 1.0, 1.0 / 64.0).unwrap();
    let cfg = McConfig::new(400_000, 8);
    let a = mc_sublevel(det2, 0.02, &d, &d, &cfg).unwrap();
    let b = mc_sublevel(det2, 0.04, &d, &d, &cfg.reseeded(1)).unwrap();
    let slope = (b.value / a.value).log2();
    assert!((slope - 1.0).abs() < 0.1, "{slope}");
    assert!(mc_sublevel(det2, 0.1, &d, &d, &McConfig::new(10, 0)).is_err());
}
