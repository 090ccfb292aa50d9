use radon_core::models::complex_pairs_respected;
use radon_core::{Geometry, Model, QuadraticModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn random_triple(geom: &Geometry, rng: &mut ChaCha8Rng) -> radon_core::Triple {
    let m_c = random_vec(rng, geom.ambient_dim());
    let l = random_vec(rng, geom.left_param_dim());
    let r = random_vec(rng, geom.right_param_dim());
    geom.triple(&m_c, &l, &r).unwrap()
}

fn check_model(model: Model) {
    let geom = Geometry::for_model(&model).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let p = random_triple(&geom, &mut rng);
        let (a, b) = geom.offsets(&p);
        let closed = model.k_closed_form(&a, &b).unwrap();
        let k = geom.k_general(&p).unwrap();
        assert!((k - closed).abs() <= 1e-10 * closed.max(1e-300), "{}: {k} vs {closed}", model.id());
    }
}

#[test]
fn k_general_matches_maximal_r5() {
    check_model(Model::MaximalR5);
}

#[test]
fn k_general_matches_harmonic_r8() {
    check_model(Model::HarmonicR8);
}

#[test]
fn k_general_matches_asymmetric() {
    for d in 1..=4 {
        check_model(Model::Asymmetric { d_r: d });
    }
}

#[test]
fn k_general_matches_bilinear() {
    let q = QuadraticModel::new(&[
        vec![vec![1.0, 0.5], vec![0.0, -2.0]],
        vec![vec![0.25, 1.0], vec![3.0, 0.0]],
    ])
    .unwrap();
    check_model(Model::Bilinear(q));
}

#[test]
fn k_restricted_matches_maximal_c5() {
    let model = Model::MaximalC5;
    let geom = Geometry::for_model(&model).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..100 {
        let p = random_triple(&geom, &mut rng);
        let (a, b) = geom.offsets(&p);
        let closed = model.k_closed_form(&a, &b).unwrap();
        let restricted = geom.k_squared_filtered(&p, complex_pairs_respected).unwrap().sqrt();
        assert!((restricted - closed).abs() <= 1e-10 * closed, "{restricted} vs {closed}");
        let full = geom.k_general(&p).unwrap();
        lo = lo.min(full / closed);
        hi = hi.max(full / closed);
    }
    println!("full / restricted in [{lo}, {hi}]");
    assert!(lo >= 1.0 - 1e-12);
}
