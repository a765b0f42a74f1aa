//! End-to-end runs of the `riccisol` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TYPE_B: &str = r#"
family = "TypeB"
[params]
lambda = -3.0
a1 = 0.3
a2 = 1.0
a3 = -0.2
[slots.psi]
closed_form = "psi_typeb_transformed"
"#;

fn riccisol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riccisol")).args(args).output().expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn claim<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["claims"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()
}

fn verify(config: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["verify", "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    riccisol(&args)
}

#[test]
fn passing_family_exits_zero_with_a_full_report() {
    let dir = TempDir::new().unwrap();
    let out = verify(&write_config(&dir, "b.toml", TYPE_B), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["version"], "1");
    assert_eq!(r["family"], "TypeB");
    assert_eq!(r["status"], "pass");
    assert_eq!(r["variant"], "t1");
    assert_eq!(r["grid"]["n1"], 41);
    assert!(r["residual"]["sup"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["params"]["lambda"].as_f64(), Some(-3.0));
    assert_eq!(claim(&r, "soliton_residual")["pass"], true);
    assert!(r["claims"].as_array().unwrap().iter().any(|c| c["name"] == "assumption:c_null"));
}

#[test]
fn perturbed_slot_fails_the_soliton_claim() {
    let dir = TempDir::new().unwrap();
    let text = format!("{TYPE_B}\n[perturb]\nslot = \"psi\"\ndelta = 0.01\n");
    let out = verify(&write_config(&dir, "b.toml", &text), &[]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["status"], "fail");
    assert_eq!(claim(&r, "soliton_residual")["pass"], false);
}

#[test]
fn report_is_written_to_out() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("report.json");
    let out = verify(&write_config(&dir, "b.toml", TYPE_B), &["--out", target.to_str().unwrap(), "--grid", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(saved["grid"]["n2"], 11);
}

#[test]
fn window_and_variant_flags_override_the_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "b.toml", TYPE_B);
    let out = verify(&cfg, &["--variant", "t2", "--window", "1.1,1.9,-0.5,0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["variant"], "t2");
    assert_eq!(r["grid"]["window"][2].as_f64(), Some(-0.5));
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let b = write_config(&dir, "b.toml", TYPE_B);
    assert_eq!(verify(&b, &["--window", "1,2,3"]).status.code(), Some(2));
    assert_eq!(verify(&b, &["--variant", "t3"]).status.code(), Some(2));
    assert_eq!(verify(&dir.path().join("missing.toml"), &[]).status.code(), Some(2));

    let unknown = write_config(&dir, "u.toml", &format!("{TYPE_B}\nbogus = 1\n"));
    assert_eq!(verify(&unknown, &[]).status.code(), Some(2));

    let positive = write_config(&dir, "p.toml", &TYPE_B.replace("lambda = -3.0", "lambda = 1.0"));
    let out = verify(&positive, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Λ<0"));

    let case_i = write_config(
        &dir,
        "i.toml",
        "family = \"CaseI\"\n[params]\nc = 1.0\n[slots.P]\nclosed_form = \"liouville_flat\"\n",
    );
    assert_eq!(verify(&case_i, &[]).status.code(), Some(0));
    assert_eq!(verify(&case_i, &["--variant", "t1"]).status.code(), Some(2));

    assert_eq!(riccisol(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn adjudicate_reports_every_variant() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "b.toml", TYPE_B);
    let out = riccisol(&["adjudicate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(r["passing"], serde_json::json!(["t1"]));
}

#[test]
fn solved_slot_round_trips_through_a_grid_file() {
    let dir = TempDir::new().unwrap();
    let grid_path = dir.path().join("p.grid");
    let solve = "family = \"CaseI\"\n[params]\nlambda = -1.0\nc = 1.0\n[grid]\nn1 = 33\nn2 = 33\n\
                 [slots.P.solve]\nboundary = \"liouville_disc\"\n";
    let cfg = write_config(&dir, "solve.toml", solve);
    let out = riccisol(&["solve", "--config", cfg.to_str().unwrap(), "--out", grid_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("discrete residual"));

    let from_file = format!(
        "family = \"CaseI\"\n[params]\nlambda = -1.0\nc = 1.0\n[grid]\nn1 = 33\nn2 = 33\n\
         [slots.P]\ngrid_file = {:?}\n[tolerances]\nresidual = 1e-2\n",
        grid_path.to_str().unwrap()
    );
    let out = verify(&write_config(&dir, "file.toml", &from_file), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(json(&out)["residual"]["sup"].as_f64().unwrap() > 1e-8);
}

#[test]
fn list_families_names_every_family() {
    let out = riccisol(&["list-families"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "CaseI",
        "TypeAprime",
        "TypeBprime",
        "TypeA",
        "TypeB",
        "CaseII2",
        "CaseII3",
        "EinsteinKundu1",
        "EinsteinKundu2",
    ] {
        assert!(text.contains(name), "{name} missing");
    }
}
