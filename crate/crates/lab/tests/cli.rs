use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use radon_lab::{plot_loglog, RunConfig, Series};

fn committed_fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn copy_store(to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(committed_fixtures()).unwrap() {
        let e = e.unwrap();
        fs::copy(e.path(), to.join(e.file_name())).unwrap();
    }
}

#[test]
fn triangle_reports_the_exact_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/out");
    let cfg = write_config(dir.path(), "t.json", r#"{"experiment": "triangle", "model": "maximal_r5"}"#);
    let o = lab(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json = fs::read_to_string(out.join("results.json")).unwrap();
    assert!(json.contains("\"5/8,5/8\""));
    assert!(out.join("results.csv").exists() && out.join("plot.svg").exists());
}

#[test]
fn invalid_config_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{\n  \"experiment\": \"knapp\",\n  \"epsilons\": [0.1, 0.2, 0.05, 0.01]\n}\n");
    let o = lab(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = write_config(dir.path(), "typo.json", "{\n  \"experiment\": \"marc\",\n  \"sed\": 4\n}\n");
    let o = lab(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn missing_fixture_exits_3_naming_the_refresh() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.json", r#"{"experiment": "marc", "budget": 10}"#);
    let empty = dir.path().join("empty");
    let o = lab(&["run", &cfg, "--fixtures", empty.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("oracle-refresh"));
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let cfg = write_config(dir.path(), "t.json", r#"{"experiment": "triangle"}"#);
    let o = lab(&["run", &cfg, "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn tampered_fixture_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    copy_store(&store);
    let p = store.join("marc_c_max.json");
    fs::write(&p, fs::read_to_string(&p).unwrap().replace("\"value\": 4.0", "\"value\": 4.5")).unwrap();
    let cfg = write_config(dir.path(), "m.json", r#"{"experiment": "marc", "budget": 10}"#);
    let o = lab(&["run", &cfg, "--fixtures", store.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracle_refresh_guards_and_force() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    copy_store(&store);
    let out = dir.path().join("o");
    let cfg = write_config(dir.path(), "r.json", r#"{"experiment": "oracle-refresh"}"#);
    let args = |extra: &[&str]| {
        let mut v = vec!["run", &cfg, "--fixtures", store.to_str().unwrap(), "--out", out.to_str().unwrap()];
        v.extend_from_slice(extra);
        v.into_iter().map(String::from).collect::<Vec<_>>()
    };
    let run = |a: Vec<String>| Command::new(env!("CARGO_BIN_EXE_lab")).args(&a).output().unwrap();

    assert_eq!(run(args(&["--budget", "10"])).status.code(), Some(2));

    let p = store.join("strip_v_star.json");
    let tampered = fs::read_to_string(&p).unwrap().replace("\"seed\": 11", "\"seed\": 12");
    fs::write(&p, &tampered).unwrap();
    assert_eq!(run(args(&[])).status.code(), Some(5));
    assert_eq!(fs::read_to_string(&p).unwrap(), tampered);

    let o = run(args(&["--force"]));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for e in fs::read_dir(committed_fixtures()).unwrap() {
        let name = e.unwrap().file_name();
        let fresh = fs::read_to_string(store.join(&name)).unwrap();
        assert_eq!(fresh, fs::read_to_string(committed_fixtures().join(&name)).unwrap(), "{name:?}");
        assert!(out.join("fixtures").join(&name).exists());
    }
}

#[test]
fn marc_table_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.json", r#"{"experiment": "marc", "seed": 42}"#);
    let run = |o: &str| {
        let out = dir.path().join(o);
        let r = lab(&["run", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(r.status.code(), Some(0));
        fs::read_to_string(out.join("results.csv")).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1001);
    assert!(a.starts_with("pair,lhs,rhs,ratio\n"));
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.json", r#"{"experiment": "marc", "seed": 1, "budget": 5}"#);
    let out = dir.path().join("o");
    let o = lab(&["run", &cfg, "--seed", "9", "--budget", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    assert_eq!(v["seed"], 9);
    assert_eq!(v["budget"], 3);
    assert_eq!(fs::read_to_string(out.join("results.csv")).unwrap().lines().count(), 4);
}

#[test]
fn plot_annotates_slopes() {
    let p = plot_loglog(&[Series::new("s", vec![(1.0, 1.0), (2.0, 4.0)])], true);
    assert!(p.svg.contains("slope 2.000"), "{}", p.svg);
    assert_eq!(p.dropped, 0);
    assert!(p.svg.starts_with("<svg"));
}

#[test]
fn plot_drops_nonpositive_points() {
    let p = plot_loglog(&[Series::new("s", vec![(1.0, 1.0), (2.0, 0.0), (-1.0, 3.0), (4.0, 16.0)])], true);
    assert_eq!(p.dropped, 2);
    assert!(p.svg.contains("slope 2.000"));
    assert_eq!(p.warnings.len(), 1);
}

#[test]
fn empty_plot_warns() {
    let p = plot_loglog(&[], true);
    assert!(p.svg.contains("no data"));
    assert!(!p.warnings.is_empty());
    let p = plot_loglog(&[Series::new("s", vec![(0.0, 1.0)])], true);
    assert!(p.svg.contains("no data"));
    assert_eq!(p.dropped, 1);
}

#[test]
fn config_hash_ignores_workers_and_output() {
    let a = RunConfig::parse(r#"{"experiment": "ttt", "workers": 1, "output_dir": "x"}"#).unwrap();
    let b = RunConfig::parse(r#"{"experiment": "ttt", "workers": 4}"#).unwrap();
    let c = RunConfig::parse(r#"{"experiment": "ttt", "seed": 1}"#).unwrap();
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), c.hash());
}

#[test]
fn config_validation() {
    for bad in [
        r#"{"experiment": "knapp", "model": "nope"}"#,
        r#"{"experiment": "knapp", "epsilons": [0.5, 0.25, 0.125, 0.0625]}"#,
        r#"{"experiment": "knapp", "epsilons": [0.25, 0.125]}"#,
        r#"{"experiment": "sublevel", "alphas": [0.5, -1.0]}"#,
        r#"{"experiment": "ttt", "budget": 0}"#,
        r#"{"experiment": "ttt", "pairs": 0}"#,
        r#"{"experiment": "knapp", "points": [["1/0", "1"]]}"#,
        r#"{"experiment": "unknown"}"#,
    ] {
        let e = RunConfig::parse(bad).unwrap_err();
        assert_eq!(e.exit_code(), 2, "{bad}");
    }
    let ok = RunConfig::parse(r#"{"experiment": "knapp", "model": "asymmetric:3", "points": [["2/3", "1"]]}"#).unwrap();
    assert_eq!(ok.seed, 42);
    assert_eq!(ok.output_dir(), PathBuf::from("lab-out"));
}
