use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn gps(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gps"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run gps")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn complete(n: u64) -> String {
    let mut s = String::new();
    for a in 0..n {
        for b in a + 1..n {
            s.push_str(&format!("{a} {b}\n"));
        }
    }
    s
}

fn setup() -> TempDir {
    let d = TempDir::new().unwrap();
    write(d.path(), "k4.txt", &complete(4));
    write(d.path(), "k10.txt", &complete(10));
    write(d.path(), "s5.txt", "0 1\n0 2\n0 3\n0 4\n0 5\n");
    d
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn oracle_counts() {
    let d = setup();
    let out = gps(&["oracle", "--input", "k4.txt"], d.path());
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"triangles":4,"wedges":12,"alpha":1.0}"#);
    let out = gps(&["oracle", "--input", "s5.txt"], d.path());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"triangles":0,"wedges":10,"alpha":0.0}"#);
}

#[test]
fn oracle_rejects_empty_input() {
    let d = setup();
    write(d.path(), "loops.txt", "# only a self loop\n7 7\n");
    let out = gps(&["oracle", "--input", "loops.txt"], d.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn estimate_exact_regime() {
    let d = setup();
    for mode in ["post", "instream"] {
        let out = gps(&["estimate", "--input", "k4.txt", "--m", "100", "--mode", mode], d.path());
        assert!(out.status.success());
        let v = json(&out);
        assert_eq!(v["n_tri"], 4.0);
        assert_eq!(v["n_wedge"], 12.0);
        assert_eq!(v["v_tri"], 0.0);
        assert_eq!(v["alpha"], 1.0);
        assert_eq!(v["format_version"], 1);
        assert_eq!(v["config"]["m"], 100);
        assert_eq!(v["config"]["mode"], mode);
        assert_eq!(v["config"]["weight_fn"]["name"], "triangle");
        assert_eq!(v["config"]["permute"], true);
        assert_eq!(v["metadata"]["zstar"], 0.0);
        assert_eq!(v["input"]["edges"], 6);
    }
}

#[test]
fn zero_reservoir_is_a_usage_error() {
    let d = setup();
    let out = gps(&["estimate", "--input", "k4.txt", "--m", "0"], d.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_weight_parameters_are_usage_errors() {
    let d = setup();
    let out = gps(&["estimate", "--input", "k4.txt", "--m", "3", "--tri-base", "0"], d.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_and_parse_errors() {
    let d = setup();
    let out = gps(&["estimate", "--input", "missing.txt", "--m", "3"], d.path());
    assert_eq!(out.status.code(), Some(3));
    write(d.path(), "bad.txt", "1 2\n2 x\n");
    let out = gps(&["estimate", "--input", "bad.txt", "--m", "3"], d.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn strict_duplicates() {
    let d = setup();
    write(d.path(), "dup.txt", "1 2\n2 3\n2 1\n");
    let out = gps(&["oracle", "--input", "dup.txt"], d.path());
    assert!(out.status.success());
    let out = gps(&["oracle", "--input", "dup.txt", "--strict-duplicates"], d.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn labels_map_to_dense_ids() {
    let d = setup();
    write(d.path(), "lab.txt", "alice bob\nbob carol\ncarol alice\ncarol dave\n");
    let out = gps(&["oracle", "--input", "lab.txt", "--labels"], d.path());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"triangles":1,"wedges":5,"alpha":0.6}"#);
    let out = gps(&["estimate", "--input", "lab.txt", "--labels", "--m", "10"], d.path());
    let v = json(&out);
    assert_eq!(v["input"]["labels"], 4);
    assert_eq!(v["n_tri"], 1.0);
}

#[test]
fn tracking_csv() {
    let d = setup();
    let out = gps(
        &[
            "estimate", "--input", "k10.txt", "--m", "20", "--mode", "instream", "--track-interval", "10",
            "--track-output", "track.csv", "--output", "report.json",
        ],
        d.path(),
    );
    assert!(out.status.success());
    let text = fs::read_to_string(d.path().join("track.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,n_tri,v_tri,ci_lo,ci_hi,n_wedge,v_wedge,alpha,zstar,sample_size");
    // 10, 20, 30, 40 and the last arrival
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("45,"));
    let report: Value = serde_json::from_str(&fs::read_to_string(d.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["track_interval"], 10);
    let last_tri: f64 = lines[5].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(report["n_tri"].as_f64().unwrap(), last_tri);
}

#[test]
fn tracking_default_path_and_csv_format() {
    let d = setup();
    let out = gps(&["estimate", "--input", "k10.txt", "--m", "20", "--track-interval", "15"], d.path());
    assert!(out.status.success());
    assert!(d.path().join("gps-track.csv").exists());
    let out = gps(&["estimate", "--input", "k10.txt", "--m", "20", "--format", "csv", "--track-interval", "15"], d.path());
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);
    let out = gps(&["estimate", "--input", "k10.txt", "--m", "20", "--format", "csv"], d.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_config_reproduces_report() {
    let d = setup();
    let args = ["estimate", "--input", "k10.txt", "--m", "12", "--seed", "42"];
    let mut a = json(&gps(&args, d.path()));
    let mut b = json(&gps(&args, d.path()));
    a.as_object_mut().unwrap().remove("micros_per_edge");
    b.as_object_mut().unwrap().remove("micros_per_edge");
    assert_eq!(a, b);
    let c = json(&gps(&["estimate", "--input", "k10.txt", "--m", "12", "--seed", "43"], d.path()));
    assert_ne!(a["n_tri"], c["n_tri"]);
}

#[test]
fn permute_can_be_disabled() {
    let d = setup();
    let out = gps(&["estimate", "--input", "k10.txt", "--m", "45", "--permute", "false"], d.path());
    let v = json(&out);
    assert_eq!(v["config"]["permute"], false);
    assert_eq!(v["n_tri"], 120.0);
}

#[test]
fn verify_k10_passes() {
    let d = setup();
    let out = gps(
        &["verify", "--input", "k10.txt", "--m", "30", "--trials", "2000", "--mode", "instream"],
        d.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["exact"]["triangles"], 120);
    assert_eq!(v["triangles"]["trials"], 2000);
    assert_eq!(v["config"]["trials"], 2000);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn verify_truth_zero_skips_triangle_check() {
    let d = setup();
    let out = gps(&["verify", "--input", "s5.txt", "--m", "3", "--trials", "100"], d.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped"));
    let v = json(&out);
    assert_eq!(v["triangles"]["are"], Value::Null);
    let tri = &v["checks"][0];
    assert_eq!(tri["skipped"], true);
}

#[test]
fn verify_zero_tolerance_fails_when_sampled() {
    let d = setup();
    let out = gps(&["verify", "--input", "k10.txt", "--m", "30", "--trials", "50", "--tolerance", "0"], d.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn verify_exact_regime_passes_at_zero_tolerance() {
    let d = setup();
    let out = gps(
        &["verify", "--input", "k10.txt", "--m", "45", "--trials", "5", "--tolerance", "0", "--check-variance"],
        d.path(),
    );
    assert!(out.status.success());
    assert_eq!(json(&out)["triangles"]["ci_coverage"], 1.0);
}

#[test]
fn verify_refuses_large_inputs() {
    let d = setup();
    let out = gps(&["verify", "--input", "k10.txt", "--m", "30", "--max-edges", "40"], d.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max-edges"));
}

#[test]
fn verify_csv_row() {
    let d = setup();
    let out = gps(
        &["verify", "--input", "k10.txt", "--m", "30", "--trials", "200", "--format", "csv", "--output", "v.csv"],
        d.path(),
    );
    assert!(out.status.success());
    let mut r = csv::Reader::from_path(d.path().join("v.csv")).unwrap();
    let headers = r.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    let get = |name: &str| rows[0][headers.iter().position(|h| h == name).unwrap()].to_string();
    assert_eq!(get("tri_truth"), "120.0");
    assert_eq!(get("trials"), "200");
    assert_eq!(get("weight_fn"), "triangle");
}
