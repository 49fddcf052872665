use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gds_core::channel::families::{amplitude_damping, bit_flip, identity, phase_flip};
use gds_core::channel::{ChannelSpec, KrausChannel};
use gds_core::gds::GdsSpec;
use serde_json::Value;

fn gds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gds")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gds-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, file: &str, text: &str) -> String {
    let p = dir.join(file);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn gds_spec(subs: &[KrausChannel<f64>]) -> String {
    GdsSpec {
        subchannels: subs.iter().map(ChannelSpec::from_channel).collect(),
    }
    .to_json()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = scratch("validate");
    let ok = write(&dir, "ok.json", &ChannelSpec::from_channel(&amplitude_damping::<f64>(0.3)).to_json());
    let out = gds(&["validate", &ok]);
    assert_eq!(out.status.code(), Some(0));
    assert!(f(&json_of(&out)["cptp_residual"]) <= 1e-10);

    let bad = r#"{"name":"bad","dim_in":2,"dim_out":2,"kraus":[[[[1,0],[0,0]],[[0,0],[1,0]]],[[[0.5,0],[0,0]],[[0,0],[0,0]]]]}"#;
    let bad = write(&dir, "bad.json", bad);
    let out = gds(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!((f(&json_of(&out)["cptp_residual"]) - 0.25).abs() < 1e-12);

    let uneq = write(&dir, "uneq.json", &gds_spec(&[identity(2), amplitude_damping(0.3)]));
    let out = gds(&["validate", &uneq]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--pad"));
    assert!(json_of(&out)["hint"].as_str().unwrap().contains("--pad"));
    let out = gds(&["validate", "--pad", &uneq]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["block_structure"], Value::Bool(true));

    let broken = write(&dir, "broken.json", "{\"name\": ");
    let out = gds(&["validate", &broken]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn bounds_degradable_pair() {
    let dir = scratch("bounds-pb");
    let path = write(&dir, "pb.json", &gds_spec(&[phase_flip(0.2), bit_flip(0.2)]));
    let out = gds(&["bounds", &path, "--restarts", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let target = 2.0 - (-(0.2f64 * 0.2f64.log2() + 0.8 * 0.8f64.log2()));
    assert!((f(&v["q1_optimizer"]) - target).abs() < 1e-6);
    assert!((f(&v["q1_optimizer"]) - 1.278072).abs() < 1e-6);
    assert_eq!(v["degradable"]["holds"], Value::Bool(true));
    assert_eq!(v["q_upper_certificate"]["feasible"], Value::Bool(true));
}

#[test]
fn bounds_cdc_chain() {
    let dir = scratch("bounds-cdc");
    let out = gds(&["cdc", "--p", "4", "--n", "1", "--emit-spec"]);
    assert_eq!(out.status.code(), Some(0));
    let path = write(&dir, "cdc.json", &String::from_utf8(out.stdout).unwrap());
    let v = json_of(&gds(&["bounds", &path, "--restarts", "8"]));
    let lower = f(&v["q1_lower_analytic"]);
    let q1 = f(&v["q1_optimizer"]);
    let upper = f(&v["q_upper_certificate"]["value_bits"]);
    assert!((lower - 0.25).abs() < 1e-9);
    assert!((upper - 1.5f64.log2()).abs() < 1e-9);
    assert!(lower <= q1 && q1 <= upper && upper < 1.0);
    assert!((f(&v["p1_lower"]) - 1.0).abs() < 1e-9);
    assert!((f(&v["c1_lower"]) - 1.0).abs() < 1e-9);
}

#[test]
fn bounds_single_letter_family() {
    let dir = scratch("bounds-ad");
    let subs = [amplitude_damping(0.6), amplitude_damping(0.7), amplitude_damping(0.8)];
    let path = write(&dir, "ad.json", &gds_spec(&subs));
    let v = json_of(&gds(&["bounds", &path, "--restarts", "4"]));
    assert_eq!(v["single_letter"]["qualifies"], Value::Bool(true));
    assert_eq!(v["single_letter"]["route"], "all_antidegradable");
    assert!((f(&v["single_letter"]["capacity_bits"]) - 3f64.log2()).abs() < 1e-11);

    let out = gds(&["single-letter", &path]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["qualifies"], Value::Bool(true));
}

#[test]
fn bounds_are_deterministic() {
    let dir = scratch("determinism");
    let path = write(&dir, "pb.json", &gds_spec(&[phase_flip(0.1), amplitude_damping(0.4)]));
    let a = gds(&["bounds", &path, "--seed", "5", "--restarts", "6"]);
    let b = gds(&["bounds", &path, "--seed", "5", "--restarts", "6"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let out = dir.join("report.json");
    let c = gds(&["bounds", &path, "--seed", "5", "--restarts", "6", "--out", out.to_str().unwrap()]);
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn fig1_quartic_rule() {
    let out = gds(&["fig1", "--p-rule", "n^4", "--n-max", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().next(), Some("n,p,q_upper_bits,private_bits,gap_bits,lambda_max"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 20);
    let gaps: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(gaps.windows(2).all(|w| w[1] > w[0]), "{gaps:?}");
    let lambdas: Vec<f64> = rows[1..].iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(lambdas.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn fig1_fixed_p_window_shrinks() {
    // For fixed p the window narrows as n grows and eventually closes.
    let out = gds(&["fig1", "--p-rule", "16", "--n-max", "10"]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 10);
    let lambdas: Vec<Option<f64>> = rows.iter().map(|r| r[5].parse().ok()).collect();
    let present: Vec<f64> = lambdas.iter().map_while(|x| *x).collect();
    assert!(lambdas[present.len()..].iter().all(Option::is_none));
    assert!(present.windows(2).all(|w| w[1] < w[0]), "{present:?}");
    assert!(lambdas[9].is_none());
}

#[test]
fn fig1_single_row_and_split_files() {
    let out = gds(&["fig1", "--p-rule", "16", "--n-max", "1"]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][3], "1");

    let dir = scratch("fig1");
    let out = gds(&["fig1", "--p-rule", "n^4", "--n-max", "3", "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let left = std::fs::read_to_string(dir.join("fig1_left.csv")).unwrap();
    let right = std::fs::read_to_string(dir.join("fig1_right.csv")).unwrap();
    assert_eq!(left.lines().count(), 4);
    assert_eq!(right.lines().next(), Some("n,p,lambda_max"));

    let out = gds(&["fig1", "--p-rule", "n - 1", "--n-max", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn superadd_verdicts() {
    let v = json_of(&gds(&["superadd", "--p", "2", "--n", "2", "--lambda", "0.5"]));
    assert_eq!(v["certified"], Value::Bool(false));
    assert!((f(&v["joint_numeric"]) - 0.5 * 3f64.log2()).abs() < 1e-9);
    assert!((f(&v["q_upper"]) - (1.0 + 2f64.sqrt()).log2()).abs() < 1e-9);

    let v = json_of(&gds(&["superadd", "--p", "16", "--n", "1", "--lambda", "0.55"]));
    assert_eq!(v["certified"], Value::Bool(true));
    assert!((f(&v["joint_numeric"]) - 0.45).abs() < 1e-9);
    assert!((f(&v["bound_sum"]) - 1.25f64.log2()).abs() < 1e-9);

    let v = json_of(&gds(&["superadd", "--p", "16", "--n", "1", "--lambda", "1"]));
    assert_eq!(v["certified"], Value::Bool(false));
    assert!(f(&v["joint_numeric"]).abs() < 1e-12);

    let out = gds(&["superadd", "--p", "64", "--n", "1", "--lambda", "0.6"]);
    assert_eq!(out.status.code(), Some(4));
    let v = json_of(&out);
    assert_eq!(v["mode"], "closed-form only");
    assert_eq!(v["joint_numeric"], Value::Null);
}

#[test]
fn cdc_certificates_and_guard() {
    let out = gds(&["cdc", "--p", "3", "--n", "2", "--require-certificate"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["chain"]["certified"], Value::Bool(true));
    assert!((f(&v["c_certificate"]["witness_summary"]["trace_S"]) - 3.0).abs() < 1e-12);

    let out = gds(&["cdc", "--p", "1000", "--n", "6"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn oracle_sandwich() {
    let dir = scratch("oracle");
    let path = write(&dir, "id.json", &ChannelSpec::from_channel(&identity::<f64>(2)).to_json());
    let v = json_of(&gds(&["oracle", &path, "--restarts", "4"]));
    assert!((f(&v["oracle_lower"]) - 2.0).abs() < 1e-6);
    assert_eq!(v["sandwich_holds"], Value::Bool(true));
}

#[test]
fn csv_reports() {
    let out = gds(&["cdc", "--p", "2", "--n", "1", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("\nbounds.q1_lower,0.5\n"));
}
