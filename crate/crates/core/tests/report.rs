use std::fs;

use parasite_branching::harness::{emit_report, find_experiment, run_experiment, Overrides, CSV_HEADER};

fn report_json(dir: &std::path::Path) -> serde_json::Value {
    let spec = find_experiment("mean-ldcg").unwrap().with_overrides(&Overrides { reps: Some(300), seed: Some(7), ..Default::default() });
    let result = run_experiment(&spec).unwrap();
    let files = emit_report(&[result], dir).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(files.json).unwrap()).unwrap();
    for e in v["experiments"].as_array_mut().unwrap() {
        e.as_object_mut().unwrap().remove("wall_clock_seconds");
    }
    v
}

#[test]
fn same_experiment_gives_the_same_report() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ra, rb) = (report_json(a.path()), report_json(b.path()));
    assert_eq!(ra, rb);
    assert_eq!(ra["master_seed"], 7);
    assert_eq!(
        fs::read_to_string(a.path().join("results.csv")).unwrap(),
        fs::read_to_string(b.path().join("results.csv")).unwrap()
    );
    assert!(!ra["experiments"][0]["cells"].as_array().unwrap().is_empty());
}

#[test]
fn empty_report_is_a_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&[], dir.path()).unwrap();
    assert_eq!(fs::read_to_string(files.csv).unwrap(), format!("{CSV_HEADER}\n"));
}
