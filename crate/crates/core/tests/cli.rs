//! End-to-end tests of the `finrank` binary and the spec format.

use finrank::cli::spec::{EnsembleFamily, GrowthCheck};
use finrank::cli::{EnsembleSpec, ExperimentKind, ExperimentSpec, Parameters};
use finrank::ensembles::AtomBounds;
use proptest::prelude::*;
use std::path::Path;
use std::process::{Command, Output};

fn finrank(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finrank"))
        .args(args)
        .env("FINRANK_OUT", out)
        .output()
        .expect("binary runs")
}

fn write_spec(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const RANK_SPEC: &str = r#"{
  "name": "rank3",
  "kind": "RankTable",
  "seed": 42,
  "ensemble": {"family": "complex_atoms", "dim": 1, "cases": 5, "atoms": [3, 3]},
  "parameters": {"n": 5}
}"#;

#[test]
fn rank_table_reports_three_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "spec.json", RANK_SPEC);
    let out = finrank(&["run", &spec], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("rank3.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "rank").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| &r[col] == "3"));
    assert!(dir.path().join("rank3.json").exists());
    assert!(dir.path().join("rank3.timings.json").exists());
}

#[test]
fn reports_are_deterministic_and_seed_override_applies() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "spec.json", RANK_SPEC);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for d in [&a, &b] {
        assert_eq!(finrank(&["run", &spec, "--out", d.to_str().unwrap()], dir.path()).status.code(), Some(0));
    }
    for file in ["rank3.json", "rank3.csv"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    let out = finrank(&["run", &spec, "--out", c.to_str().unwrap(), "--seed", "7", "--format", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_ne!(std::fs::read(a.join("rank3.json")).unwrap(), std::fs::read(c.join("rank3.json")).unwrap());
    assert!(!c.join("rank3.csv").exists());
}

#[test]
fn vandermonde_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "v.json",
        r#"{"name":"v2","kind":"VandermondeCheck","seed":1,"parameters":{"n_vars":2,"cases":50}}"#,
    );
    let out = finrank(&["run", &spec], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("v2.csv")).unwrap();
    assert_eq!(text.lines().count(), 52);
    assert!(!text.contains(",false,"));
}

#[test]
fn malformed_and_invalid_specs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_spec(dir.path(), "bad.json", "{\"name\": \"x\", \"kind\": ");
    let out = finrank(&["run", &bad], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse"));

    let invalid = write_spec(dir.path(), "invalid.json", &RANK_SPEC.replace("\"n\": 5", "\"eps_rel\": 3"));
    assert_eq!(finrank(&["run", &invalid], dir.path()).status.code(), Some(2));

    let missing = dir.path().join("nope.json");
    assert_eq!(finrank(&["run", missing.to_str().unwrap()], dir.path()).status.code(), Some(2));
    assert_eq!(finrank(&["frobnicate"], dir.path()).status.code(), Some(2));
}

#[test]
fn empty_ensemble_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "e.json", &RANK_SPEC.replace("\"cases\": 5", "\"cases\": 0"));
    assert_eq!(finrank(&["run", &spec], dir.path()).status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("rank3.csv")).unwrap();
    assert_eq!(text, "case,label,pass,n,rank,expected_rank,gap,error\n");
}

#[test]
fn failing_case_exits_1_with_false_in_pass_column() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "f.json",
        r#"{"name":"f","kind":"Wiener","weights":[{"type":"atomic","ambient":{"kind":"real","dim":1},
            "points":[[0.0]],"masses":[[1,0]]}],"parameters":{"r_schedule":[8],"expected":0.5}}"#,
    );
    assert_eq!(finrank(&["run", &spec], dir.path()).status.code(), Some(1));
    let mut reader = csv::Reader::from_path(dir.path().join("f.csv")).unwrap();
    let col = reader.headers().unwrap().iter().position(|h| h == "pass").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(&rows[0][col], "false");
}

#[test]
fn suite_and_describe() {
    let dir = tempfile::tempdir().unwrap();
    let out = finrank(&["suite", "vandermonde-2", "cauchy-circle"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("cauchy-circle.json").exists());
    assert_eq!(finrank(&["suite", "no-such-spec"], dir.path()).status.code(), Some(2));

    let list = finrank(&["suite", "--list"], dir.path());
    assert!(String::from_utf8_lossy(&list.stdout).contains("rank-atoms"));

    let describe = finrank(&["describe"], dir.path());
    assert_eq!(describe.status.code(), Some(0));
    let schema: serde_json::Value = serde_json::from_slice(&describe.stdout).unwrap();
    assert!(schema["kinds"]["RankTable"]["metrics"].is_array());
}

fn arb_spec() -> impl Strategy<Value = ExperimentSpec> {
    let kinds = prop::sample::select(ExperimentKind::ALL.to_vec());
    let families = prop::sample::select(vec![EnsembleFamily::ComplexAtoms, EnsembleFamily::RealAtoms]);
    (
        kinds,
        any::<u64>(),
        families,
        1usize..4,
        0usize..20,
        prop::option::of(1u32..10),
        prop::option::of(1e-12..0.5f64),
        prop::option::of(prop::collection::vec(0.5..100.0f64, 1..5)),
        prop::option::of(prop::sample::select(vec![GrowthCheck::EqualsAtoms, GrowthCheck::StrictlyIncreasing])),
        any::<bool>(),
    )
        .prop_map(|(kind, seed, family, dim, cases, n, eps, schedule, check, expect_failure)| {
            let ensemble = (kind != ExperimentKind::VandermondeCheck).then(|| EnsembleSpec {
                family,
                dim,
                cases,
                atoms: [1, 3],
                max_order: 0,
                bounds: AtomBounds::default(),
            });
            ExperimentSpec {
                name: format!("spec-{seed}"),
                kind,
                seed,
                ensemble,
                weights: Vec::new(),
                parameters: Parameters {
                    n,
                    eps_rel: eps,
                    r_schedule: schedule,
                    check,
                    expect_failure,
                    ..Parameters::default()
                },
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spec_round_trips(spec in arb_spec()) {
        let text = spec.to_json();
        prop_assert_eq!(ExperimentSpec::parse(&text).unwrap(), spec);
    }
}
