use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use radon_core::mc::mc_mean;
use radon_core::sublevel::ball_volume;
use radon_core::ttt::{bilinear_form, bilinear_form_adjoint, bilinear_form_quadrature, random_box_union_pair, refine, ttt_form};
use radon_core::{AveragingOperator, Error, LatticeSet, McConfig, Model, ParamRegion};
use rand::Rng;

fn agree(a: f64, sa: f64, b: f64, sb: f64) -> bool {
    (a - b).abs() <= 4.0 * sa.hypot(sb) + 1e-12
}

/// `∫_G T χ_F` with `T χ_F` sampled on a `k^d` midpoint grid inside every
/// cell of `G` instead of at the cell center alone.
fn subcell_form(op: &AveragingOperator, f: &LatticeSet, g: &LatticeSet, k: usize) -> f64 {
    let d = g.dim();
    let h = g.spacing();
    let per_cell = k.pow(d as u32);
    let mut x = vec![0.0; d];
    let mut acc = 0.0;
    for c in g.cells().unwrap() {
        let base = g.cell_center(&c);
        for idx in 0..per_cell {
            let mut m = idx;
            for j in 0..d {
                x[j] = base[j] - h / 2.0 + h * ((m % k) as f64 + 0.5) / k as f64;
                m /= k;
            }
            acc += op.apply_set(f, &x);
        }
    }
    acc * g.cell_volume() / per_cell as f64
}

#[test]
fn lattice_ball_measure_converges() {
    for (dim, r) in [(2, 1.0), (3, 0.7), (5, 0.5)] {
        let b = LatticeSet::ball(&vec![0.0; dim], r, r / 16.0).unwrap();
        let rel = (b.measure() - ball_volume(dim, r)).abs() / ball_volume(dim, r);
        assert!(rel < 0.03, "dim {dim}: {rel}");
    }
}

#[test]
fn ball_volume_closed_forms() {
    let pi = std::f64::consts::PI;
    assert!((ball_volume(1, 2.0) - 4.0).abs() < 1e-12);
    assert!((ball_volume(2, 1.0) - pi).abs() < 1e-12);
    assert!((ball_volume(3, 1.0) - 4.0 * pi / 3.0).abs() < 1e-12);
    assert!((ball_volume(4, 1.0) - pi * pi / 2.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn samples_lie_in_the_set(seed in 0u64..1000, r in 0.2f64..1.0) {
        let s = LatticeSet::ball(&[0.3, -0.2], r, r / 8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = [0.0; 2];
        for _ in 0..100 {
            s.sample(&mut rng, &mut x).unwrap();
            prop_assert!(s.contains(&x));
        }
    }

    #[test]
    fn union_measure_is_subadditive(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let disk = |c: f64| {
            LatticeSet::from_region(&[-2.0, -1.0], &[2.0, 1.0], 1.0 / 16.0, move |x| (x[0] - c).hypot(x[1]) < 0.5)
                .unwrap()
        };
        let (s, t) = (disk(a), disk(b));
        let u = s.union(&t).unwrap();
        prop_assert!(u.measure() <= s.measure() + t.measure() + 1e-12);
        prop_assert!(s.is_subset_of(&u).unwrap());
        prop_assert!(t.is_subset_of(&u).unwrap());
    }

    #[test]
    fn mc_is_independent_of_workers(seed in 0u64..10_000, samples in 1000u64..30_000) {
        let f = |cfg: McConfig| {
            mc_mean(&cfg, || (), |rng, _| {
                let x: f64 = rng.gen();
                x * x
            })
            .unwrap()
        };
        let base = McConfig::new(samples, seed);
        let one = f(base.with_workers(1));
        let three = f(base.with_workers(3));
        prop_assert_eq!(one, three);
        prop_assert_eq!(one, f(base.with_workers(1)));
    }
}

#[test]
fn mc_mean_of_uniform_square() {
    let est = mc_mean(&McConfig::new(200_000, 1), || (), |rng, _| {
        let x: f64 = rng.gen();
        x * x
    })
    .unwrap();
    assert!(agree(est.value, est.stderr, 1.0 / 3.0, 0.0), "{est:?}");
    assert_eq!(est.samples, 200_000);
}

#[test]
fn lattice_rejects_bad_spacing() {
    assert!(LatticeSet::ball(&[0.0], 1.0, 0.0).is_err());
    assert!(LatticeSet::empty(0, vec![], 1.0).is_err());
    assert!(LatticeSet::from_cells(2, vec![0.0, 0.0], 1.0, vec![vec![1]]).is_err());
}

#[test]
fn forms_agree_from_both_sides() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (model, tol) in [(Model::MaximalR5, 0.05), (Model::Asymmetric { d_r: 2 }, 0.02)] {
        let op = AveragingOperator::for_model(&model).unwrap();
        let pair = random_box_union_pair(&op, &mut rng).unwrap();
        let cfg = McConfig::new(400_000, 3);
        let a = bilinear_form(&op, &pair.f, &pair.g, &cfg).unwrap();
        let b = bilinear_form_adjoint(&op, &pair.f, &pair.g, &cfg.reseeded(1)).unwrap();
        assert!(agree(a.value, a.stderr, b.value, b.stderr), "{}: {a:?} vs {b:?}", model.id());
        // one node per cell of G is too coarse for a discontinuous integrand
        assert_eq!(bilinear_form_quadrature(&op, &pair.f, &pair.g).unwrap(), subcell_form(&op, &pair.f, &pair.g, 1));
        let q = subcell_form(&op, &pair.f, &pair.g, 2);
        assert!((q - a.value).abs() <= tol * a.value + 4.0 * a.stderr, "{}: quadrature {q} vs {a:?}", model.id());
    }
}

#[test]
fn constant_kernel_form_is_product_of_measures() {
    // T f = χ_{B_R} ∫_{B_L} f, so ∫_G T χ_F = |F ∩ B_L| |G ∩ B_R|
    // nodes at spacing 1/64 put exactly four in every cell of F, none on a face
    let op = AveragingOperator::product(ParamRegion::cube(2, -1.0, 1.0), ParamRegion::cube(2, -1.0, 1.0)).with_nodes(128);
    let f = LatticeSet::ball(&[0.0, 0.0], 0.5, 1.0 / 32.0).unwrap();
    let g = LatticeSet::ball(&[0.2, 0.1], 0.4, 1.0 / 32.0).unwrap();
    let exact = f.measure() * g.measure();
    let est = bilinear_form(&op, &f, &g, &McConfig::new(200_000, 2)).unwrap();
    assert!(agree(est.value, est.stderr, exact, 0.0), "{est:?} vs {exact}");
    let q = bilinear_form_quadrature(&op, &f, &g).unwrap();
    assert!((q - exact).abs() <= 1e-9 * exact, "{q} vs {exact}");
}

#[test]
fn refinement_is_a_subset_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let op = AveragingOperator::for_model(&Model::Asymmetric { d_r: 2 }).unwrap();
    for _ in 0..3 {
        let pair = random_box_union_pair(&op, &mut rng).unwrap();
        let r = refine(&op, &pair.f, &pair.g).unwrap();
        assert!(r.f.is_subset_of(&pair.f).unwrap());
        assert!(r.g.is_subset_of(&pair.g).unwrap());
        assert!(!r.f.is_empty() && !r.g.is_empty());
        // the refined form keeps at least a third of the mass
        let kept = bilinear_form_quadrature(&op, &r.f, &r.g).unwrap();
        assert!(kept >= r.form / 3.0 - 1e-12, "{kept} < {} / 3", r.form);
        let t = ttt_form(&op, &pair.f, &pair.g, &r.f, &r.g, &McConfig::new(50_000, 4)).unwrap();
        assert!(t.value > 0.0);
    }
}

#[test]
fn disjoint_sets_are_a_trivial_pair() {
    let op = AveragingOperator::for_model(&Model::Asymmetric { d_r: 1 }).unwrap();
    let f = LatticeSet::ball(&[50.0, 50.0], 0.5, 0.25).unwrap();
    let g = LatticeSet::ball(&[-50.0, -50.0], 0.5, 0.25).unwrap();
    assert!(matches!(refine(&op, &f, &g), Err(Error::TrivialPair)));
}
