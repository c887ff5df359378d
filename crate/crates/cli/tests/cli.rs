use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qwalk(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("QWALK_WORKERS")
        .output()
        .expect("spawn qwalk")
}

fn ok(out: &Path, args: &[&str]) -> Output {
    let o = qwalk(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (headers, rows)
}

fn summary(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn schema() -> jsonschema::Validator {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schemas/summary.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

#[test]
fn every_summary_matches_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["walk", "line", "--steps", "20", "--classical-iters", "1000"]);
    ok(d, &["walk", "square2d", "--steps", "5", "--init", "max"]);
    ok(d, &["search", "--family", "square2d", "--sizes", "6,8", "--trace"]);
    ok(d, &["tunnel-sweep", "--from", "hex2d", "--sizes", "6,8", "--p", "0,1"]);
    ok(d, &["depth-sweep", "--side", "6", "--depths", "1:3", "--cubic-sides", "3,4"]);
    ok(d, &["connectivity-sweep", "--sizes", "6", "--p", "0.5"]);
    ok(d, &["percolation", "--sizes", "6", "--p", "0.8,1", "--m", "4", "--dump"]);
    ok(d, &["fit", "--input", d.join("search.csv").to_str().unwrap(), "--model", "sqrt", "--y", "peak_time"]);

    let validator = schema();
    let mut seen = 0;
    for entry in std::fs::read_dir(d).unwrap() {
        let path = entry.unwrap().path();
        if path.to_string_lossy().ends_with("_summary.json") {
            let doc = summary(&path);
            let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
            assert!(errors.is_empty(), "{}: {errors:?}", path.display());
            for name in doc["outputs"].as_array().unwrap() {
                assert!(d.join(name.as_str().unwrap()).exists());
            }
            seen += 1;
        }
    }
    assert_eq!(seen, 8);

    let bad = serde_json::json!({ "command": "search", "surprise": 1 });
    assert!(!validator.is_valid(&bad));
}

#[test]
fn csv_uses_lf_and_header() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["search", "--family", "square2d", "--sizes", "10:30:10"]);
    let bytes = std::fs::read(dir.path().join("search.csv")).unwrap();
    assert!(!bytes.contains(&b'\r'));
    assert!(bytes.ends_with(b"\n"));
    let (headers, rows) = read_csv(&dir.path().join("search.csv"));
    assert_eq!(headers.join(","), "family,N,extents,p_tunnel,peak_time,peak_prob,success,threshold,t_max,seed");
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][1], "400");
    assert_eq!(rows[1][2], "20x20");
}

#[test]
fn tunnel_sweep_cardinality() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["tunnel-sweep", "--from", "stacked2d", "--p", "0:1:0.1", "--sizes", "6:14"]);
    let (_, rows) = read_csv(&dir.path().join("tunnel_sweep.csv"));
    assert_eq!(rows.len(), 99);
    assert!(rows.iter().all(|r| r[0] == "stacked2d"));
}

#[test]
fn percolation_at_one_repeats_the_same_member() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["percolation", "--dim", "2", "--p", "1.0", "--m", "10", "--sizes", "12", "--dump"]);
    let (headers, rows) = read_csv(&dir.path().join("percolation_members_N144_p1.csv"));
    assert_eq!(headers.join(","), "index,present_count,peak_time,peak_prob,success");
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r[1..] == rows[0][1..]));
    let (headers, rows) = read_csv(&dir.path().join("percolation.csv"));
    assert_eq!(headers.join(","), "dim,N,p,M,mean_peak_prob,agg_time,success_rate,seed");
    assert_eq!(rows[0][6], "1.0");
}

#[test]
fn all_failures_write_the_sentinel() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["percolation", "--p", "0", "--m", "5", "--sizes", "8"]);
    let (_, rows) = read_csv(&dir.path().join("percolation.csv"));
    assert_eq!(rows[0][5], "none");
    assert_eq!(rows[0][6], "0.0");
}

#[test]
fn line_walk_with_no_steps_is_a_delta() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["walk", "line", "--steps", "0"]);
    let (_, rows) = read_csv(&dir.path().join("walk_line_quantum.csv"));
    assert_eq!(rows, vec![vec!["0".to_string(), "1.0".to_string()]]);
}

#[test]
fn fit_recovers_exact_synthetic_data() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("synthetic.csv");
    let mut text = String::from("N,T,group\n");
    for s in [10u32, 20, 40, 80] {
        let n = f64::from(s * s);
        text += &format!("{n},{},a\n{n},{},b\n", 2.0 * n.sqrt(), 3.0 * n.sqrt());
    }
    std::fs::write(&input, text).unwrap();
    let o = ok(dir.path(), &["fit", "--input", input.to_str().unwrap(), "--model", "SQRT_PREFACTOR", "--y", "T", "--group-by", "group"]);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let fits = report["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 2);
    assert_eq!(fits[0]["group"], "a");
    assert!((fits[0]["coefficients"][0].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((fits[1]["coefficients"][0].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert!(fits[0]["residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(fits[0]["n_points"], 4);
    assert!(dir.path().join("fit_report.json").exists());
}

#[test]
fn invalid_arguments_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["search", "--family", "hex2d", "--sizes", "5"][..],
        &["search", "--family", "nonesuch", "--sizes", "5"],
        &["search", "--family", "square2d", "--sizes", "8", "--bogus"],
        &["tunnel-sweep", "--from", "square_diag2d", "--sizes", "6"],
        &["percolation", "--p", "1.5", "--m", "2"],
        &["fit", "--input", "/nonexistent.csv", "--model", "log", "--y", "peak_prob"],
        &["walk", "square2d", "--steps", "3", "--init", "wobbly"],
    ] {
        let o = qwalk(dir.path(), args);
        assert!(!o.status.success(), "{args:?} should fail");
        assert!(!o.stderr.is_empty());
    }
    std::fs::write(dir.path().join("wrong.csv"), "a,b\n1,2\n").unwrap();
    let o = qwalk(dir.path(), &["fit", "--input", dir.path().join("wrong.csv").to_str().unwrap(), "--model", "log", "--y", "peak_prob"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema mismatch"));
}

#[test]
fn worker_count_does_not_change_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["percolation", "--sizes", "8,10", "--p", "0.7,0.9", "--m", "6", "--dump"];
    ok(a.path(), &[&["--workers", "1"][..], &args].concat());
    let o = Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .arg("--out")
        .arg(b.path())
        .args(args)
        .env("QWALK_WORKERS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(summary(&b.path().join("percolation_summary.json"))["workers"], 3);
    for name in ["percolation.csv", "percolation_members_N64_p0.7.csv", "percolation_members_N100_p0.9.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn line_walk_spreads_ballistically() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["walk", "line", "--steps", "100", "--classical-iters", "50000"]);
    let (_, rows) = read_csv(&dir.path().join("walk_line_quantum.csv"));
    let support: Vec<i64> = rows
        .iter()
        .filter(|r| r[1].parse::<f64>().unwrap() > 0.0)
        .map(|r| r[0].parse().unwrap())
        .collect();
    let width = support.iter().max().unwrap() - support.iter().min().unwrap();
    assert_eq!(width, 200, "support spans 2t");
    assert!(dir.path().join("walk_line_classical.csv").exists());
    let s = summary(&dir.path().join("walk_line_summary.json"));
    let var = s["results"]["classical_variance"].as_f64().unwrap();
    assert!((var - 100.0).abs() <= 5.0, "classical variance {var}");
}

#[test]
fn symmetric_square_walk_stays_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["walk", "square2d", "--init", "sym", "--steps", "50"]);
    let (headers, rows) = read_csv(&dir.path().join("walk_square2d.csv"));
    assert_eq!(headers.join(","), "x,y,probability");
    let prob = |r: &Vec<String>| r[2].parse::<f64>().unwrap();
    let best = rows.iter().max_by(|a, b| prob(a).total_cmp(&prob(b))).unwrap();
    assert_eq!((best[0].as_str(), best[1].as_str()), ("0", "0"));
    assert!(prob(best) > 0.2);
}
