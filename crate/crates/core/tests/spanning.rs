use num_complex::Complex64;
use proptest::prelude::*;

use radon_core::complex_det::{complex_block_det, complex_det};
use radon_core::nondegeneracy::{one_param_spanning, two_param_family, two_param_spanning, Condition};
use radon_core::{FramePair, Geometry, Model, VectorField};

fn generic_point(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.3 + 0.11 * i as f64).collect()
}

fn constant_frames(d_l: usize, d_r: usize, n_l: usize, n_r: usize, ell: usize) -> FramePair<f64> {
    let n = d_l + d_r + ell;
    let left = (0..d_l).map(|i| VectorField::coordinate(n, i)).collect();
    let right = (0..d_r).map(|j| VectorField::coordinate(n, d_l + j)).collect();
    FramePair::new(left, right, n_l, n_r, ell).unwrap()
}

#[test]
fn maximal_r5_spans_under_both_conditions() {
    let g = Geometry::for_model(&Model::MaximalR5).unwrap();
    let p = generic_point(7);
    for cond in [Condition::First, Condition::Second] {
        let out = two_param_spanning(g.frames(), &p, [1.0, 0.0], [0.0, 1.0], cond).unwrap();
        assert!(out.holds, "{cond:?}");
        let w = out.witness.unwrap();
        assert!(w == [1.0, 0.0] || w == [0.0, 1.0]);
        let fam = two_param_family(g.frames(), &p, [1.0, 0.0], [0.0, 1.0], w, cond).unwrap();
        assert_eq!(fam.len(), 7);
    }
}

#[test]
fn commuting_frames_never_span() {
    let f = constant_frames(2, 2, 5, 5, 3);
    let p = generic_point(7);
    for (v, v2) in [([1.0, 0.0], [0.0, 1.0]), ([1.0, 2.0], [-0.5, 3.0])] {
        let out = two_param_spanning(&f, &p, v, v2, Condition::First).unwrap();
        assert!(!out.holds);
        assert_eq!(out.witness, None);
    }
    let f1 = constant_frames(1, 2, 4, 3, 2);
    assert!(!one_param_spanning(&f1, &generic_point(5)).unwrap());
}

#[test]
fn dependent_directions_are_rejected() {
    let g = Geometry::for_model(&Model::MaximalR5).unwrap();
    assert!(two_param_spanning(g.frames(), &generic_point(7), [1.0, 2.0], [2.0, 4.0], Condition::First).is_err());
}

#[test]
fn asymmetric_model_spans_with_one_bracket_layer() {
    let g = Geometry::for_model(&Model::Asymmetric { d_r: 2 }).unwrap();
    assert!(one_param_spanning(g.frames(), &generic_point(g.ambient_dim())).unwrap());
    // wrong shape for the one-parameter routine
    let g5 = Geometry::for_model(&Model::MaximalR5).unwrap();
    assert!(one_param_spanning(g5.frames(), &generic_point(7)).is_err());
    assert!(two_param_spanning(g.frames(), &generic_point(g.ambient_dim()), [1.0, 0.0], [0.0, 1.0], Condition::First)
        .is_err());
}

#[test]
fn block_determinant_fixed_cases() {
    let (real, sq) = complex_block_det(&[vec![Complex64::new(3.0, 4.0)]]);
    assert!((real - 25.0).abs() < 1e-12 && (sq - 25.0).abs() < 1e-12);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (real, sq) = complex_block_det(&[vec![one, zero], vec![zero, one]]);
    assert!((real - 1.0).abs() < 1e-12 && (sq - 1.0).abs() < 1e-12);
}

fn complex_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<Complex64>>> {
    prop::collection::vec(prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n), n)
        .prop_map(|rows| rows.into_iter().map(|r| r.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).collect())
}

/// Leibniz expansion over permutations, with no pivoting.
fn leibniz(z: &[Vec<Complex64>]) -> Complex64 {
    let n = z.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Complex64::new(0.0, 0.0);
    permute(&mut perm, 0, &mut |p| {
        let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
        let term = (0..n).fold(Complex64::new(1.0, 0.0), |acc, i| acc * z[i][p[i]]);
        total += if inversions % 2 == 0 { term } else { -term };
    });
    total
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

proptest! {
    #[test]
    fn block_determinant_is_modulus_squared(z in (1usize..5).prop_flat_map(complex_matrix)) {
        let (real, sq) = complex_block_det(&z);
        prop_assert!((real - sq).abs() <= 1e-10 * (1.0 + sq));
        let d = leibniz(&z);
        prop_assert!((complex_det(&z) - d).norm() <= 1e-10 * (1.0 + d.norm()));
    }
}
