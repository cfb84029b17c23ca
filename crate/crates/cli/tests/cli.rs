//! End-to-end checks of the command-line surface: artifact shapes, the
//! exit-code contract, and byte-identical reproduction from the emitted
//! configuration echo.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xigap"))
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("xigap-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

#[test]
fn functional_divisor_reproduces_reference_value() {
    let dir = tmpdir("func");
    let out = run_in(
        &dir,
        &[
            "functional",
            "--kind",
            "divisor",
            "--r",
            "2",
            "--alpha",
            "1.5",
            "--coeffs",
            "1,7,-1.5",
            "--out",
            "f.json",
        ],
    );
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("f.json")).unwrap()).unwrap();
    let value = doc["result"]["functional"]["value"].as_f64().unwrap();
    assert!((value - 0.9998).abs() < 5e-5, "value {value}");
    assert_eq!(doc["config"]["command"], "functional");
    assert_eq!(doc["config"]["kind"], "divisor");
    let summary = String::from_utf8_lossy(&out.stdout);
    assert!(summary.contains("h1(alpha=1.5)"), "summary: {summary}");
}

#[test]
fn prime_with_zero_twist_is_exactly_alpha() {
    let dir = tmpdir("prime0");
    let out = run_in(
        &dir,
        &[
            "functional", "--kind", "prime", "--alpha", "0.5", "--c", "0", "--out", "p.json",
        ],
    );
    assert_eq!(exit_code(&out), 0);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("p.json")).unwrap()).unwrap();
    assert_eq!(doc["result"]["functional"]["value"].as_f64().unwrap(), 0.5);
}

#[test]
fn zeros_csv_has_29_rows_below_100() {
    let dir = tmpdir("zeros");
    let out = run_in(
        &dir,
        &[
            "zeros", "--kind", "zeta", "--t-min", "10", "--t-max", "100", "--out", "z.csv",
        ],
    );
    assert_eq!(exit_code(&out), 0);
    let csv = std::fs::read_to_string(dir.join("z.csv")).unwrap();
    let lines: Vec<&str> = csv.trim_end().lines().collect();
    assert_eq!(lines[0], "index,kind,ordinate,bracket_lo,bracket_hi");
    assert_eq!(lines.len(), 30, "29 data rows plus header");
    assert!(lines[1].contains("zeta"));
}

#[test]
fn validation_errors_exit_2() {
    let dir = tmpdir("val");
    for args in [
        vec!["functional", "--kind", "bogus", "--alpha", "1"],
        vec!["functional", "--kind", "prime", "--alpha", "1"], // missing --c
        vec!["zeros", "--kind", "zeta", "--t-min", "5", "--t-max", "50"],
        vec!["functional", "--kind", "divisor", "--alpha", "-1"],
        vec!["empirical", "--kind", "moebius", "--alpha", "1", "--theta", "0.9"],
    ] {
        let out = run_in(&dir, &args);
        assert_eq!(exit_code(&out), 2, "args {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    // Unknown config key is a validation error too.
    std::fs::write(dir.join("bad.cfg"), "command=uv\nwibble=3\n").unwrap();
    let out = run_in(&dir, &["uv", "--alpha", "1", "--config", "bad.cfg"]);
    assert_eq!(exit_code(&out), 2);
    // Malformed flags produce the usage error code as well.
    let out = run_in(&dir, &["functional", "--alpha", "not-a-number"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn accuracy_failure_exits_3() {
    let dir = tmpdir("acc");
    // Far too oscillatory for the panel budget at this tolerance.
    let out = run_in(&dir, &["uv", "--alpha", "40000000", "--tol", "1e-13"]);
    assert_eq!(
        exit_code(&out),
        3,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn config_echo_reproduces_bit_identical_output() {
    let dir = tmpdir("echo");
    let out = run_in(
        &dir,
        &[
            "functional",
            "--kind",
            "moebius",
            "--r",
            "2",
            "--alpha",
            "0.7203",
            "--coeffs",
            "1,4.4,2.3",
            "--out",
            "a.json",
        ],
    );
    assert_eq!(exit_code(&out), 0);
    let a = std::fs::read_to_string(dir.join("a.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&a).unwrap();

    // Flatten the echo block into the key=value config format.
    let mut flat = String::new();
    for (k, v) in doc["config"].as_object().unwrap() {
        let vs = match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        flat.push_str(&format!("{k}={vs}\n"));
    }
    std::fs::write(dir.join("echo.cfg"), flat).unwrap();

    let out2 = run_in(
        &dir,
        &["functional", "--config", "echo.cfg", "--out", "b.json"],
    );
    assert_eq!(
        exit_code(&out2),
        0,
        "{}",
        String::from_utf8_lossy(&out2.stderr)
    );
    let b = std::fs::read_to_string(dir.join("b.json")).unwrap();
    assert_eq!(a, b, "artifacts differ between flag and config runs");
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tmpdir("workers");
    let args = [
        "gaps", "--t-min", "100", "--t-max", "140", "--alphas", "0.8,1.0",
    ];
    let out1 = bin()
        .current_dir(&dir)
        .args(args)
        .args(["--workers", "1", "--out", "w1.json"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out1), 0, "{}", String::from_utf8_lossy(&out1.stderr));
    let out4 = bin()
        .current_dir(&dir)
        .args(args)
        .env("XIGAP_WORKERS", "4")
        .args(["--out", "w4.json"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out4), 0);
    let w1 = std::fs::read_to_string(dir.join("w1.json")).unwrap();
    let w4 = std::fs::read_to_string(dir.join("w4.json")).unwrap();
    assert_eq!(w1, w4, "results depend on worker count");
}

#[test]
fn optimize_prime_report_shape() {
    let dir = tmpdir("opt");
    let out = run_in(
        &dir,
        &[
            "optimize",
            "--family",
            "prime",
            "--direction",
            "large",
            "--out",
            "o.json",
        ],
    );
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("o.json")).unwrap()).unwrap();
    let rep = &doc["result"]["report"];
    assert!(rep["best_alpha"].as_f64().unwrap() >= 1.18);
    assert!(rep["h1_at_best"].as_f64().unwrap() < 1.0);
    assert_eq!(rep["direction"], "large_gap");
    assert!(rep["trace"].as_array().unwrap().len() > 2);
}

#[test]
fn moebius_moment_is_refused_via_library_error_mapping() {
    // The unsupported second-moment path surfaces as a validation error.
    let dir = tmpdir("refuse");
    std::fs::write(dir.join("t.cfg"), "command=uv\nalpha=0.5\n").unwrap();
    let ok = run_in(&dir, &["uv", "--config", "t.cfg", "--out", "u.json"]);
    assert_eq!(exit_code(&ok), 0);
    // Config for the wrong command is rejected.
    let bad = run_in(&dir, &["gaps", "--config", "t.cfg"]);
    assert_eq!(exit_code(&bad), 2);
}
