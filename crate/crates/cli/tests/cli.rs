//! End-to-end tests against the `wbt` binary.

use std::process::{Command, Output};

fn wbt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wbt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        !out.stdout.is_empty(),
        "no stdout; stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn verify_test_quick_range_passes() {
    let out = wbt(&["verify-test", "--z-min", "50", "--z-max", "200000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["verdict"], true);
    assert_eq!(v["checks"], 2 * (200_000 - 50));
    assert!(v["min_margin"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_test_deterministic_across_runs_and_threads() {
    let args = ["verify-test", "--z-min", "50", "--z-max", "150000"];
    let a = wbt(&args);
    let b = wbt(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(
        a.stdout, b.stdout,
        "two identical runs must emit identical bytes"
    );

    let one = wbt(&[
        "--threads",
        "1",
        "verify-test",
        "--z-min",
        "50",
        "--z-max",
        "150000",
    ]);
    let four = wbt(&[
        "--threads",
        "4",
        "verify-test",
        "--z-min",
        "50",
        "--z-max",
        "150000",
    ]);
    assert_eq!(a.stdout, one.stdout, "1-thread run must match");
    assert_eq!(a.stdout, four.stdout, "4-thread run must match");
}

#[test]
fn verify_test_resume_equals_uninterrupted() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("sweep.ckpt");
    let z_max = (3 * wbt_core::campaign::BLOCK_LEN + 999).to_string();
    let full = wbt(&[
        "verify-test",
        "--z-min",
        "50",
        "--z-max",
        &z_max,
        "--stride",
        "1",
        "--checkpoints",
        ckpt.to_str().unwrap(),
    ]);
    assert_eq!(full.status.code(), Some(0));

    // Keep only the first checkpoint, as if the run had been interrupted.
    let lines = std::fs::read_to_string(&ckpt).unwrap();
    let first = lines.lines().next().unwrap();
    let truncated = dir.path().join("interrupted.ckpt");
    std::fs::write(&truncated, format!("{first}\n")).unwrap();

    let resumed = wbt(&[
        "--resume",
        truncated.to_str().unwrap(),
        "verify-test",
        "--z-min",
        "50",
        "--z-max",
        &z_max,
        "--stride",
        "1",
    ]);
    assert_eq!(resumed.status.code(), Some(0));
    assert_eq!(full.stdout, resumed.stdout);
}

#[test]
fn verify_q_and_h_pass() {
    let q = wbt(&["verify-q", "--z-max", "100000"]);
    assert_eq!(q.status.code(), Some(0));
    let v = stdout_json(&q);
    assert_eq!(v["report"]["status"], "pass");
    assert_eq!(v["report"]["rhs"], 0.68);

    let h = wbt(&["verify-h", "--z-max", "100000"]);
    assert_eq!(h.status.code(), Some(0));
    let v = stdout_json(&h);
    assert_eq!(v["report"]["rhs"], 47.0);
}

#[test]
fn constants_all_pass() {
    let out = wbt(&["constants", "--all"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let reports = v["reports"].as_array().unwrap();
    assert!(reports.len() >= 15);
    for r in reports {
        assert_eq!(r["verdict"], true, "constant failed: {r}");
    }
}

#[test]
fn verify_s_desk_scale() {
    let out = wbt(&[
        "verify-s",
        "--samples",
        "1000,50000",
        "--prime-cutoff",
        "1000000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["result"]["floor_constant"]["verdict"], true);
    assert_eq!(v["result"]["residuals"].as_array().unwrap().len(), 2);
}

#[test]
fn sieve_sums_with_weights() {
    let out = wbt(&["sieve-sums", "--k", "2", "--z", "100", "--with-weights"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["weights"]["identities_hold"], true);
    assert!(v["S"].as_f64().unwrap() > 0.0);
    assert!(v["H"].as_f64().unwrap() > v["S"].as_f64().unwrap());
}

#[test]
fn theorem4_reports_both_forms() {
    let out = wbt(&[
        "theorem4", "--shape", "hat", "--x", "0", "--y", "200", "--k", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let labels: Vec<&str> = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["label"].as_str().unwrap())
        .collect();
    assert!(labels.contains(&"theorem4-with-correction"));
    assert!(labels.contains(&"theorem4-factor3"));
}

#[test]
fn corpus_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cases.txt");
    std::fs::write(
        &path,
        "# shape kmod lres x y scale resolution\n\
         constant 1 0 2 28 1.0 1\n\
         hat 3 1 0 2000 2.0 2\n",
    )
    .unwrap();
    let out = wbt(&["corpus", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    // constant k=1: T4 pair + T5; hat k=3: T4 pair.
    assert_eq!(v["reports"].as_array().unwrap().len(), 5);
}

#[test]
fn corpus_rejects_bad_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "hat 4 2 0 100 1.0 2\n").unwrap();
    let out = wbt(&["corpus", "--file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tabulate_binary_dump() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("table.bin");
    let out = wbt(&[
        "tabulate",
        "--lo",
        "1",
        "--hi",
        "100",
        "--bin",
        bin.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["summary"]["primes"], 25);

    let bytes = std::fs::read(&bin).unwrap();
    assert_eq!(&bytes[0..4], b"WBT1");
    assert_eq!(bytes.len(), 4 + 16 + 18 * 100);
    let lo = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
    let hi = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    assert_eq!((lo, hi), (1, 100));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = wbt(&[
        "--out",
        path.to_str().unwrap(),
        "verify-q",
        "--z-max",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["command"], "verify-q");
}

#[test]
fn exit_codes() {
    // Unknown subcommand / flags: usage error.
    assert_eq!(wbt(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(wbt(&["verify-q", "--bogus"]).status.code(), Some(2));
    // Semantic precondition: z_min below the grid start.
    assert_eq!(
        wbt(&["verify-test", "--z-min", "10", "--z-max", "100"])
            .status
            .code(),
        Some(2)
    );
    // Resource budget: enumeration span too long.
    assert_eq!(
        wbt(&[
            "theorem5",
            "--shape",
            "constant",
            "--x",
            "0",
            "--y",
            "200000001"
        ])
        .status
        .code(),
        Some(3)
    );
}

#[test]
fn theorem5_accepts_custom_weight_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("weight.txt");
    // A ramp from 0 to 1 over [0, 100]: ‖f‖₁ = 50, sup = 1, tv = 1, ρ = 25.
    std::fs::write(&path, "0 0\n100 1\n").unwrap();
    let out = wbt(&["theorem5", "--weight-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let rhs = v["reports"][0]["rhs"].as_f64().unwrap();
    assert!((rhs - 2.0 * 50.0 / 25f64.ln()).abs() < 1e-9);

    // Mixing the file with a shape is a usage error.
    let mixed = wbt(&[
        "theorem5",
        "--weight-file",
        path.to_str().unwrap(),
        "--shape",
        "hat",
    ]);
    assert_eq!(mixed.status.code(), Some(2));
}

#[test]
fn exact_decimal_endpoints_decide_membership() {
    // [0.5, 10.5] contains the primes 2, 3, 5, 7 — the half-integer
    // endpoints must not be misrounded.
    let out = wbt(&["theorem5", "--shape", "constant", "--x", "0.5", "--y", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["reports"][0]["lhs"], 4.0);
}
