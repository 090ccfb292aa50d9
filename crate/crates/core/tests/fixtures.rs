use radon_core::fixtures::{oracle, Fixture, FixtureError, FixtureStore, ORACLES, STRIP_PARAMS};
use radon_core::sublevel::strip_annulus_measure;
use radon_core::Estimate;

fn committed() -> FixtureStore {
    FixtureStore::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

#[test]
fn committed_fixtures_are_intact() {
    let store = committed();
    for o in ORACLES.iter() {
        let fx = store.load(o.name).unwrap();
        assert_eq!(fx.seed, o.seed);
        // oracles run at ten times the everyday budget; exact ones record none
        assert_eq!(fx.samples, o.oracle_config().samples, "{}", o.name);
    }
}

#[test]
fn exact_oracles_reproduce_bit_for_bit() {
    let store = committed();
    for name in ["marc_c_max", "marc_c_harm", "shell_ratio_sup"] {
        let o = oracle(name).unwrap();
        let fresh = o.refresh(1).unwrap();
        assert_eq!(fresh, store.load(name).unwrap(), "{name}");
    }
}

#[test]
fn strip_fixture_matches_the_closed_form() {
    let fx = committed().load("strip_v_star").unwrap();
    let (r1, r2, w) = STRIP_PARAMS;
    assert!(fx.agrees(&Estimate::exact(strip_annulus_measure(r1, r2, w).unwrap()), 4.0), "{fx:?}");
}

#[test]
fn hash_covers_every_field() {
    let fx = Fixture::new("x", Estimate { value: 1.5, stderr: 0.25, samples: 10 }, 3);
    assert!(fx.is_intact());
    for tampered in [
        Fixture { value: 1.5000001, ..fx.clone() },
        Fixture { stderr: 0.26, ..fx.clone() },
        Fixture { seed: 4, ..fx.clone() },
        Fixture { samples: 11, ..fx.clone() },
        Fixture { name: "y".into(), ..fx.clone() },
    ] {
        assert!(!tampered.is_intact());
    }
}

#[test]
fn store_round_trip_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let store = FixtureStore::new(dir.path());
    match store.load("absent") {
        Err(FixtureError::Missing { name, .. }) => assert_eq!(name, "absent"),
        other => panic!("{other:?}"),
    }
    let err = store.load("absent").unwrap_err().to_string();
    assert!(err.contains("configs/oracle-refresh.json"), "{err}");

    let fx = Fixture::new("v", Estimate { value: 0.1 + 0.2, stderr: 1e-17, samples: 7 }, 1);
    store.save(&fx).unwrap();
    assert_eq!(store.load("v").unwrap(), fx);

    let path = dir.path().join("v.json");
    let text = std::fs::read_to_string(&path).unwrap().replace("\"samples\": 7", "\"samples\": 8");
    std::fs::write(&path, text).unwrap();
    assert!(matches!(store.load("v"), Err(FixtureError::HashMismatch { .. })));
    assert!(store.load_raw("v").is_some());
}
