use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ghx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghx"))
        .env_remove("GHX_THREADS")
        .args(args)
        .output()
        .unwrap()
}

fn system(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../systems")
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn verdict_exit_codes() {
    let ok = ghx(&["verdict", "--config", &system("gradient_t2"), "--cutoff", "10"]);
    assert_eq!(code(&ok), 0);
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["classification"], "GH_CONSISTENT");

    let bad = ghx(&["verdict", "--config", &system("d1_t2"), "--cutoff", "10"]);
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("GH_VIOLATED"));
}

#[test]
fn verdict_from_saved_records() {
    let dir = tempfile::tempdir().unwrap();
    let scan_out = dir.path().join("scan.json");
    let o = ghx(&["scan", "--config", &system("x3_su2"), "--cutoff", "8", "--out", scan_out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = ghx(&["verdict", "--records", scan_out.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn scan_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv: PathBuf = dir.path().join("r.csv");
    let o = ghx(&["scan", "--config", &system("coupled_t1"), "--cutoff", "3", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("xi,bracket,lambda_min,det_hs,det_chain,varah,varah_relaxed"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[2], "1.0000000000000000e0");
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["record_count"].as_u64().unwrap() as usize, text.lines().count() - 1);
}

#[test]
fn bad_config_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"group\": \"torus:2\", \"m\": 1, \"n\": 1,\n \"grid\": [[{\"kind\": \"bogus\"}]]}").unwrap();
    let o = ghx(&["scan", "--config", p.to_str().unwrap(), "--cutoff", "3"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&ghx(&["scan", "--cutoff", "3"])), 1);
    assert_eq!(code(&ghx(&["scan", "--config", &system("d1_t2"), "--cutoff", "-1"])), 1);
    assert_eq!(code(&ghx(&["--help"])), 0);
}

#[test]
fn counterexample_on_violated_system() {
    let o = ghx(&["counterexample", "--config", &system("x3_su2"), "--max-cutoff", "10"]);
    assert_eq!(code(&o), 0);
    let entries: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let entries = entries.as_array().unwrap();
    assert!(entries.len() >= 3);
    assert_eq!(entries[0]["ell"], 1);
}

#[test]
fn bounds_rows_are_sound_on_scalar_blocks() {
    let o = ghx(&["bounds", "--config", &system("coupled_t1"), "--cutoff", "6"]);
    assert_eq!(code(&o), 0);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for row in doc["records"].as_array().unwrap() {
        assert!(row["unsound"].as_array().unwrap().is_empty(), "{row}");
    }
}

#[test]
fn fourier_check_runs() {
    let o = ghx(&["fourier-check", "--seed", "3", "--count", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn selftest_passes() {
    let o = ghx(&["selftest", "--seed", "5"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(!out.contains("FAIL"), "{out}");
}

#[test]
fn threads_env_overrides_flag() {
    let base = ghx(&["--threads", "1", "scan", "--config", &system("sub_laplacian_su2"), "--cutoff", "6"]);
    let env = Command::new(env!("CARGO_BIN_EXE_ghx"))
        .env("GHX_THREADS", "3")
        .args(["--threads", "1", "scan", "--config", &system("sub_laplacian_su2"), "--cutoff", "6"])
        .output()
        .unwrap();
    assert_eq!(code(&env), 0);
    assert_eq!(base.stdout, env.stdout);
}
