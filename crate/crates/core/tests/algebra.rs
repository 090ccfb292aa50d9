use proptest::prelude::*;

use radon_core::linalg::{det, wedge_volume};
use radon_core::{lie_bracket, Exact, ExactPoly, ExactVectorField, Geometry, Model, QuadraticModel, Scalar};

const NVARS: usize = 3;

fn ex(n: i64) -> Exact {
    Exact::from_int(n)
}

/// Polynomials of degree at most two in three variables with small integer
/// coefficients.
fn poly() -> impl Strategy<Value = ExactPoly> {
    prop::collection::vec((-3i64..=3, 0u32..=2, 0u32..=2, 0u32..=1), 1..5).prop_map(|terms| {
        terms.into_iter().fold(ExactPoly::zero(NVARS), |acc, (c, a, b, d)| {
            &acc + &ExactPoly::monomial(NVARS, vec![a, b, d], ex(c))
        })
    })
}

fn field() -> impl Strategy<Value = ExactVectorField> {
    prop::collection::vec(poly(), NVARS).prop_map(|c| ExactVectorField::new(c).unwrap())
}

fn point() -> impl Strategy<Value = Vec<Exact>> {
    prop::collection::vec((-5i64..=5, 1i64..=4), NVARS)
        .prop_map(|v| v.into_iter().map(|(n, d)| Exact::new(n.into(), d.into())).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_evaluates_pointwise(p in poly(), q in poly(), x in point()) {
        prop_assert_eq!((&p * &q).eval(&x), p.eval(&x) * q.eval(&x));
        prop_assert_eq!((&p - &q).eval(&x), p.eval(&x) - q.eval(&x));
    }

    #[test]
    fn leibniz_rule(p in poly(), q in poly(), i in 0..NVARS) {
        let lhs = (&p * &q).partial(i);
        let rhs = &(&p.partial(i) * &q) + &(&p * &q.partial(i));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bracket_is_antisymmetric(v in field(), w in field()) {
        let vw = lie_bracket(&v, &w).unwrap();
        let wv = lie_bracket(&w, &v).unwrap();
        prop_assert!(vw.add(&wv).unwrap().is_zero());
    }

    #[test]
    fn bracket_satisfies_jacobi(u in field(), v in field(), w in field()) {
        let a = lie_bracket(&u, &lie_bracket(&v, &w).unwrap()).unwrap();
        let b = lie_bracket(&v, &lie_bracket(&w, &u).unwrap()).unwrap();
        let c = lie_bracket(&w, &lie_bracket(&u, &v).unwrap()).unwrap();
        prop_assert!(a.add(&b).unwrap().add(&c).unwrap().is_zero());
    }

    #[test]
    fn bracket_is_commutator_of_derivations(v in field(), w in field(), f in poly()) {
        let vw = lie_bracket(&v, &w).unwrap();
        let lhs = vw.apply(&f);
        let rhs = &v.apply(&w.apply(&f)) - &w.apply(&v.apply(&f));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wedge_volume_is_rotation_invariant(
        vs in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 4), 1..4),
        theta in 0.0f64..6.28,
    ) {
        let (c, s) = (theta.cos(), theta.sin());
        let rotated: Vec<Vec<f64>> =
            vs.iter().map(|v| vec![c * v[0] - s * v[2], v[1], s * v[0] + c * v[2], v[3]]).collect();
        let a = wedge_volume(&vs).unwrap();
        let b = wedge_volume(&rotated).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
    }

    #[test]
    fn wedge_volume_of_full_family_is_abs_det(m in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 3)) {
        let v = wedge_volume(&m).unwrap();
        prop_assert!((v - det(&m).abs()).abs() <= 1e-9 * (1.0 + v));
    }

    #[test]
    fn vol_q_is_homogeneous(
        x in prop::collection::vec(-1.0f64..1.0, 1),
        y in prop::collection::vec(-1.0f64..1.0, 3),
        lambda in 0.1f64..10.0,
    ) {
        // ell = 3 vectors, each linear in (x, y)
        let q = QuadraticModel::asymmetric(3);
        let base = q.vol_q(&x, &y).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v * lambda).collect();
        let ys: Vec<f64> = y.iter().map(|v| v * lambda).collect();
        let scaled = q.vol_q(&xs, &ys).unwrap();
        prop_assert!((scaled - lambda.powi(3) * base).abs() <= 1e-9 * (1.0 + scaled));
        let phi = q.phi_q(&xs, &ys).unwrap().value;
        let kappa = (q.d_l() + q.d_r() - q.ell()) as i32;
        let expected = q.phi_q(&x, &y).unwrap().value * lambda.powi(q.ell() as i32 - kappa);
        prop_assert!((phi - expected).abs() <= 1e-9 * (1.0 + phi.abs()));
    }
}

#[test]
fn phi_q_at_origin_is_flagged() {
    let q = QuadraticModel::asymmetric(2);
    let p = q.phi_q(&[0.0], &[0.0, 0.0]).unwrap();
    assert!(p.degenerate);
    assert_eq!(p.value, 0.0);
}

#[test]
fn frames_span_the_tangent_space_with_brackets() {
    // X_L, X_R and their brackets must span at a generic point of every model
    for model in [Model::MaximalR5, Model::HarmonicR8, Model::Asymmetric { d_r: 2 }] {
        let g = Geometry::for_model(&model).unwrap();
        let f = g.frames();
        let n = g.ambient_dim();
        let p: Vec<f64> = (0..n).map(|i| 0.1 + 0.07 * i as f64).collect();
        let mut vs: Vec<Vec<f64>> = f.left.iter().chain(&f.right).map(|v| v.eval(&p)).collect();
        for l in &f.left {
            for r in &f.right {
                vs.push(lie_bracket(l, r).unwrap().eval(&p));
            }
        }
        let rank_ok = radon_core::linalg::combinations(vs.len(), n)
            .into_iter()
            .any(|s| wedge_volume(&s.iter().map(|&i| vs[i].clone()).collect::<Vec<_>>()).unwrap() > 1e-8);
        assert!(rank_ok, "{}", model.id());
    }
}

#[test]
fn dimension_mismatch_is_an_error() {
    let v = ExactVectorField::coordinate(2, 0);
    let w = ExactVectorField::coordinate(3, 0);
    assert!(lie_bracket(&v, &w).is_err());
}
