use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::Arc;

use realdec::decnorm::imaginary_part_map;
use realdec::{LinearMap, MatrixSystem};
use realdec_cli::MapDocument;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_realdec"));
    c.env_remove("REALDEC_TOL");
    c
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_map(name: &str, u: &LinearMap) -> PathBuf {
    let p = tmp(name);
    std::fs::write(&p, MapDocument::from_map(u).to_json()).unwrap();
    p
}

fn m2() -> Arc<MatrixSystem> {
    Arc::new(MatrixSystem::full_real(2).unwrap())
}

fn json_stdout(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

const ID2: &str = r#"{
  "domain": {"kind": "full_real", "n": 2},
  "codomain": {"kind": "full_real", "n": 2},
  "images": [[[1, 0], [0, 0]], [[0, 1], [0, 0]], [[0, 0], [1, 0]], [[0, 0], [0, 1]]]
}"#;

#[test]
fn dec_norm_of_identity_is_one() {
    let p = tmp("id2.json");
    std::fs::write(&p, ID2).unwrap();
    let o = bin()
        .args(["norm", "--kind", "dec", "--map"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = json_stdout(&o);
    assert_eq!(v["status"], "finite");
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(v["residuals"]["duality_gap"].is_number());
    assert_eq!(v["witnesses"]["s1"].as_array().unwrap().len(), 4);
}

#[test]
fn cb_norm_of_transpose_is_two() {
    let u = LinearMap::from_fn(&m2(), &m2(), |x| x.transpose()).unwrap();
    let p = write_map("transpose.json", &u);
    let o = bin()
        .args(["norm", "--kind", "cb", "--map"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v = json_stdout(&o);
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn quaternion_dims_suite_reports_10_and_6() {
    let o = bin()
        .args([
            "verify",
            "--suite",
            "quaternion_dims",
            "--seed",
            "1",
            "--trials",
            "1",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v = json_stdout(&o);
    let rec = &v["records"][0]["measured"];
    assert_eq!(rec["dim_selfadjoint"].as_f64(), Some(10.0));
    assert_eq!(rec["dim_skew"].as_f64(), Some(6.0));
    assert_eq!(v["pass"], true);

    let md = bin()
        .args([
            "verify",
            "--suite",
            "quaternion_dims",
            "--seed",
            "1",
            "--trials",
            "1",
        ])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&md.stdout);
    assert!(text.contains("| 10 | 6 |"), "{text}");
}

#[test]
fn truncated_file_is_an_input_error() {
    let p = tmp("truncated.json");
    std::fs::write(&p, &ID2[..ID2.len() / 2]).unwrap();
    let o = bin()
        .args(["norm", "--kind", "dec", "--map"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn diagnostics_name_the_offending_field() {
    let bad_type = ID2.replace(r#""n": 2}"#, r#""n": "two"}"#);
    let p = tmp("bad_type.json");
    std::fs::write(&p, bad_type).unwrap();
    let o = bin()
        .args(["norm", "--kind", "dec", "--map"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("domain") || err.contains("codomain"), "{err}");

    let short = ID2.replace(r#", [[0, 0], [0, 1]]]"#, "]");
    let p = tmp("short.json");
    std::fs::write(&p, short).unwrap();
    let o = bin()
        .args(["check", "--property", "cp", "--map"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("images"));

    let outside = r#"{
      "domain": {"kind": "ell_inf", "n": 2},
      "codomain": {"kind": "ell_inf", "n": 2},
      "images": [[[1, 0], [0, 0]], [[0, 1], [0, 1]]]
    }"#;
    let p = tmp("outside.json");
    std::fs::write(&p, outside).unwrap();
    let o = bin()
        .args(["check", "--property", "cp", "--map"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("images[1]"));
}

#[test]
fn usage_errors_exit_2() {
    let o = bin().args(["norm", "--bogus"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin()
        .args([
            "verify",
            "--suite",
            "nonexistent",
            "--seed",
            "1",
            "--trials",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("quaternion_dims"));
    let o = bin().arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn tolerance_environment_override() {
    let p = tmp("id2_env.json");
    std::fs::write(&p, ID2).unwrap();
    let o = bin()
        .env("REALDEC_TOL", "not-a-number")
        .args(["norm", "--kind", "dec", "--map"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin()
        .env("REALDEC_TOL", "1e-7")
        .args(["norm", "--kind", "dec", "--map"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    // Outside the solver's accepted range.
    let o = bin()
        .env("REALDEC_TOL", "0.5")
        .args(["norm", "--kind", "dec", "--map"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_properties_of_imaginary_part() {
    let im = imaginary_part_map(2).unwrap();
    let p = write_map("im2.json", &im);
    let run = |prop: &str| {
        bin()
            .args(["check", "--property", prop, "--map"])
            .arg(&p)
            .output()
            .unwrap()
    };
    let skew = run("skew");
    assert_eq!(skew.status.code(), Some(0));
    assert_eq!(json_stdout(&skew)["holds"], true);
    let sa = run("selfadjoint");
    assert_eq!(sa.status.code(), Some(1));
    let cp = run("cp");
    assert_eq!(cp.status.code(), Some(1));
    assert_eq!(json_stdout(&cp)["status"], "not_cp");

    let o = bin()
        .args(["norm", "--kind", "dec", "--map"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!((json_stdout(&o)["value"].as_f64().unwrap() - 1.0).abs() < 1e-5);
}

#[test]
fn check_cp_on_identity() {
    let p = tmp("id2_cp.json");
    std::fs::write(&p, ID2).unwrap();
    let o = bin()
        .args(["check", "--property", "cp", "--map"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_stdout(&o)["holds"], true);
}

#[test]
fn documents_round_trip() {
    let doc = MapDocument::parse(ID2).unwrap();
    let again = MapDocument::parse(&doc.to_json()).unwrap();
    assert_eq!(doc.images, again.images);
    assert_eq!(doc.domain.kind, again.domain.kind);
    assert_eq!(doc.codomain.kind, again.codomain.kind);

    let h = Arc::new(MatrixSystem::quaternion().unwrap());
    let conj = LinearMap::from_fn(&h, &h, |x| x.transpose()).unwrap();
    let text = MapDocument::from_map(&conj).to_json();
    let back = MapDocument::parse(&text).unwrap().to_map().unwrap();
    assert_eq!(back.images(), conj.images());
    assert!(back.domain().same_span(conj.domain()));
    assert_eq!(MapDocument::from_map(&back).to_json(), text);
}

#[test]
fn report_re_renders_saved_runs() {
    let json = tmp("ruan_report.json");
    let o = bin()
        .args([
            "verify", "--suite", "real_gap", "--seed", "3", "--trials", "2", "--format", "csv",
            "--output",
        ])
        .arg(&json)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8_lossy(&o.stdout).to_string();
    assert!(csv.starts_with("suite,seed,trial,digest"));
    let r = bin()
        .args(["report", "--format", "csv", "--input"])
        .arg(&json)
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&r.stdout), csv);

    let broken = tmp("broken_report.json");
    std::fs::write(&broken, "{\"suite\": 1}").unwrap();
    let r = bin()
        .args(["report", "--input"])
        .arg(&broken)
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("suite"));
}
