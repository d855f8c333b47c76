//! End-to-end behaviour of the `loopeq` binary.

use std::path::Path;
use std::process::Command;

use loopeq_cli::output::sha256_hex;

fn loopeq(args: &[&str], dir: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_loopeq"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&out.stdout).to_string() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap_or(-1), text)
}

fn summary(dir: &Path, cmd: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{cmd}.json"))).unwrap()).unwrap()
}

#[test]
fn certify_prints_both_bounds_and_the_factor() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = loopeq(
        &[
            "certify",
            "--set",
            "params={\"n\":100000000000000,\"beta\":1e-21,\"b\":25000000001}",
            "--set",
            "loop.r=2",
            "--set",
            "loop.s=2",
        ],
        dir.path(),
    );
    assert_eq!(code, 0, "{text}");
    let csv = std::fs::read_to_string(dir.path().join("certify-certificates.csv")).unwrap();
    assert!(csv.starts_with("quantity,value,log10,rigorous\n"));
    assert!(csv.contains("truncated_bound,3.2"));
    assert!(csv.contains("contraction_truncated,"));
    let s = summary(dir.path(), "certify");
    assert_eq!(s["passed"], true);
    assert_eq!(s["config"]["params"]["b"], 25000000001u64);
}

#[test]
fn malformed_and_unknown_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"lattice\": ").unwrap();
    let (code, _) = loopeq(&["area", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(code, 2);
    std::fs::write(&bad, "{ \"lattice\": {\"l\": 2, \"d\": 2, \"extra\": 1} }").unwrap();
    let (code, text) = loopeq(&["area", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(code, 2);
    assert!(text.contains("unknown field"), "{text}");
    let (code, _) = loopeq(&["area", "--set", "params.beta=-1"], dir.path());
    assert_eq!(code, 2);
    let (code, _) = loopeq(&["no-such-command"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn capacity_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = loopeq(&["clusters", "--set", "clusters.max_size=3", "--set", "clusters.cap=5"], dir.path());
    assert_eq!(code, 3, "{text}");
}

#[test]
fn failed_assertions_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = loopeq(
        &["solve-truncated", "--set", "solve.mode=certified", "--set", "norm={\"lambda\":1,\"gamma\":1,\"rho\":1}"],
        dir.path(),
    );
    assert_eq!(code, 1, "{text}");
    assert!(text.contains("FAIL converged"));
}

#[test]
fn mutant_is_reported_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = loopeq(&["verify-lemmas", "--cases", "30", "--seed", "7", "--set", "lemmas.mutant=true"], dir.path());
    assert_eq!(code, 1, "{text}");
    let s = summary(dir.path(), "verify-lemmas");
    let failing: Vec<&serde_json::Value> =
        s["checks"].as_array().unwrap().iter().filter(|c| c["passed"] == false).collect();
    assert!(!failing.is_empty());
    assert!(failing.iter().all(|c| c["detail"].as_str().unwrap().contains("s=")));
    let (code, _) = loopeq(&["verify-lemmas", "--cases", "30", "--seed", "7"], dir.path());
    assert_eq!(code, 0);
}

#[test]
fn artifacts_are_hashed_and_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["mc-wilson", "--samples", "2000", "--seed", "9", "--set", "loop.r=2"];
    let (c1, _) = loopeq(&[&args[..], &["--threads", "1"]].concat(), a.path());
    let (c2, _) = loopeq(&[&args[..], &["--threads", "3"]].concat(), b.path());
    assert!(c1 <= 1 && c2 <= 1);
    let x = std::fs::read(a.path().join("mc-wilson-mc.csv")).unwrap();
    let y = std::fs::read(b.path().join("mc-wilson-mc.csv")).unwrap();
    assert_eq!(x, y);
    let header = String::from_utf8(x.clone()).unwrap();
    assert!(header.starts_with("observable,mean_re,mean_im,se,samples,seed\n"));
    let s = summary(a.path(), "mc-wilson");
    assert_eq!(s["artifacts"][0]["sha256"].as_str().unwrap(), sha256_hex(&x));
    assert_eq!(s["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(s["config"]["sampling"]["seed"], 9);
}

#[test]
fn every_command_runs_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["check-params", "area", "clusters", "residual", "u1-exact", "mc-phi"] {
        let (code, text) = loopeq(&[cmd, "--samples", "1000", "--set", "monomials.exact_cases=100"], dir.path());
        assert_eq!(code, 0, "{cmd}: {text}");
        assert!(dir.path().join(format!("{cmd}.json")).exists());
    }
}
