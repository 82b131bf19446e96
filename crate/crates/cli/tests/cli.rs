use std::path::Path;
use std::process::{Command, Output};

fn hessmetric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hessmetric")).args(args).env_remove("HESSMETRIC_CACHE").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SCENARIO: &str = r#"{
  "n": 2,
  "profiles": {
    "u": {"kink": {"slope": 1.0, "level": -1.0}},
    "v": {"breakpoints": [-2.0, -0.5], "slopes": [0.0, 0.5, 1.5]},
    "w": {"kink": {"slope": 0.5, "level": -0.3}}
  },
  "weight": "w",
  "pairs": [["u", "v"], ["v", "w"]]
}"#;

#[test]
fn selftest_on_empty_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.json", "{}");
    let out = hessmetric(&["selftest", "--scenario", &empty]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.lines().count() > 100);
    assert!(report.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn every_subcommand_passes_on_a_valid_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", SCENARIO);
    for cmd in ["energy", "metric", "envelope", "geodesic", "capacity"] {
        let out = hessmetric(&[cmd, "--scenario", &scenario]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stdout));
        let report = String::from_utf8(out.stdout).unwrap();
        assert_eq!(report.lines().next().unwrap(), "quantity,inputs,expected,actual,rel_err,tolerance,provenance,pass");
        assert!(report.lines().count() > 1, "{cmd} emitted no rows");
    }
}

#[test]
fn failing_row_gives_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", SCENARIO);
    let out = hessmetric(&["capacity", "--scenario", &scenario, "--tolerance", "1e-15"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains(",false"));
}

#[test]
fn reproduce_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for target in [&a, &b] {
        let out = hessmetric(&["reproduce", "topology-ex1", "--n", "3", "--out", target.to_str().unwrap()]);
        assert!(out.status.success());
    }
    for name in ["report.csv", "topology-ex1.table.csv"] {
        let first = std::fs::read(a.join(name)).unwrap();
        assert!(!first.is_empty());
        assert_eq!(first, std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let leftovers: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 2, "{leftovers:?}");
}

#[test]
fn reproduce_topology_ex2_columns() {
    let out = hessmetric(&["reproduce", "topology-ex2", "--n", "2", "--jmax", "50"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("j,"), "{header}");
    assert_eq!(text.lines().take_while(|l| !l.is_empty()).count(), 51);
}

#[test]
fn json_report_carries_every_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = hessmetric(&["reproduce", "intro-norm", "--format", "json", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    let first = &rows.as_array().unwrap()[0];
    for key in ["quantity", "inputs", "expected", "actual", "rel_err", "tolerance", "provenance", "pass"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn unknown_example_is_a_usage_error() {
    let out = hessmetric(&["reproduce", "no-such-example"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("intro-norm"));
}

#[test]
fn malformed_scenario_reports_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\n  \"n\": 2,\n  \"profiles\": {\"u\": {\"kink\": {\"slope\": true, \"level\": -1}}}\n}");
    let out = hessmetric(&["energy", "--scenario", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("bad.json:3:"), "{err}");
    assert!(err.contains("profiles.u.kink.slope"), "{err}");
}

#[test]
fn constant_cache_is_written_where_requested() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("constants.json");
    let out = Command::new(env!("CARGO_BIN_EXE_hessmetric"))
        .args(["reproduce", "geodesic-kinks", "--n", "2", "--m", "1"])
        .env("HESSMETRIC_CACHE", &cache)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let map: serde_json::Value = serde_json::from_slice(&std::fs::read(&cache).unwrap()).unwrap();
    assert!(map.get("2,1").and_then(|v| v.as_f64()).is_some(), "{map}");
}
