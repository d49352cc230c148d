//! End-to-end checks of the `hqd` binary: exit-code contract, report
//! shapes, and byte-level determinism.

use std::fs;
use std::process::{Command, Output};

fn hqd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hqd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn verify_single_suite_passes() {
    let out = hqd(&[
        "verify", "--suite", "dhqd", "--m", "2", "--n", "4", "--l", "10", "--seed", "7",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["config"]["seed"], 7);
    assert_eq!(report["suites"][0]["suite"], "dhqd");
}

#[test]
fn verify_all_m1_notes_reductions() {
    let out = hqd(&[
        "verify", "--suite", "all", "--m", "1", "--n", "3", "--l", "3", "--seed", "5",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);
    let suites = report["suites"].as_array().unwrap();
    // hirota is included at m = 1 and every suite carries the reduction note.
    assert!(suites.iter().any(|s| s["suite"] == "hirota"));
    assert!(suites.iter().all(|s| {
        s["notes"]
            .as_array()
            .map(|n| n.iter().any(|v| v.as_str().unwrap().contains("m = 1")))
            .unwrap_or(false)
    }));
}

#[test]
fn verify_rejects_m_zero_with_usage_exit() {
    let out = hqd(&["verify", "--suite", "dhqd", "--m", "0"]);
    assert_eq!(exit_code(&out), 64);
}

#[test]
fn verify_rejects_unknown_suite() {
    let out = hqd(&["verify", "--suite", "nonsense", "--m", "1"]);
    assert_eq!(exit_code(&out), 64);
}

#[test]
fn verify_hirota_without_m1_is_usage_error() {
    let out = hqd(&["verify", "--suite", "hirota", "--m", "2"]);
    assert_eq!(exit_code(&out), 64);
}

#[test]
fn verify_reports_are_byte_identical_for_same_config() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    for dir in [&dir1, &dir2] {
        let out = hqd(&[
            "verify", "--suite", "linrel", "--m", "2", "--n", "3", "--l", "4",
            "--seed", "9", "--out", dir.path().to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0);
    }
    let a = fs::read(dir1.path().join("verify_report.json")).unwrap();
    let b = fs::read(dir2.path().join("verify_report.json")).unwrap();
    assert_eq!(a, b, "reports differ for identical config + seed");
}

#[test]
fn verify_accepts_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"suite":"dhlv","m":[2],"n_max":3,"l_max":4,"seed":3}"#,
    )
    .unwrap();
    let out = hqd(&["verify", "--config", cfg.to_str().unwrap(), "--seed", "4"]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["suite"], "dhlv");
    // Explicit flag wins over the file.
    assert_eq!(report["config"]["seed"], 4);

    fs::write(&cfg, r#"{"bogus_field": 1}"#).unwrap();
    let out = hqd(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 64);
}

#[test]
fn verify_with_inline_measure_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("measure.json");
    fs::write(
        &spec,
        r#"{"nodes":["4","2","1","1/2","8","5","9/2"],"weights":["1","1","2","1","1/3","1","2"]}"#,
    )
    .unwrap();
    let out = hqd(&[
        "verify", "--suite", "biorth", "--m", "2", "--n", "4", "--l", "4",
        "--measure", spec.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn eigen_demo_passes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = hqd(&[
        "eigen", "--nodes", "4,2,1", "--m", "1", "--l", "60", "--tol", "1e-6",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("eigen_traces.csv")).unwrap();
    assert!(csv.starts_with("n,l,estimate,target,abs_error\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 61);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("eigen_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["report"]["pass"], true);
}

#[test]
fn eigen_rejects_duplicate_nodes() {
    let out = hqd(&["eigen", "--nodes", "2,2,1", "--m", "1"]);
    assert_eq!(exit_code(&out), 64);
}

#[test]
fn eigen_zero_tolerance_fails_in_float_mode() {
    let out = hqd(&[
        "eigen", "--nodes", "4,2,1", "--m", "1", "--l", "40", "--tol", "0", "--mode", "float",
    ]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn dump_tau_grid_shape() {
    let out = hqd(&["dump", "--kind", "tau", "--m", "2", "--n", "4", "--l", "8", "--seed", "7"]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let dump: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let lat = &dump["lattice"];
    assert_eq!(lat["m"], 2);
    assert_eq!(lat["origin"], "oracle");
    let tau = lat["tau"].as_array().unwrap();
    assert_eq!(tau.len(), 4);
    assert_eq!(tau[0].as_array().unwrap().len(), 8);
    assert_eq!(lat["vars"]["vt"].as_array().unwrap().len(), 4);
    // Rationals as "p/q" strings.
    assert!(tau[1][1].is_string());
}

#[test]
fn dump_evolved_origin_is_tagged() {
    let out = hqd(&[
        "dump", "--kind", "tau", "--m", "1", "--n", "4", "--l", "5", "--seed", "3", "--evolved",
    ]);
    assert_eq!(exit_code(&out), 0);
    let dump: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(dump["lattice"]["origin"], "evolved");
}

#[test]
fn dump_elliptic_has_all_four_families() {
    let out = hqd(&["dump", "--kind", "elliptic", "--m", "2", "--n", "3", "--l", "4", "--seed", "2"]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let dump: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let lat = &dump["lattice"];
    for fam in ["delta", "theta", "pi", "sigma"] {
        assert!(lat[fam].is_array(), "missing {fam}");
    }
    for var in ["u", "v", "w"] {
        assert!(lat["vars"][var].is_array(), "missing var {var}");
    }
}

#[test]
fn dump_degenerate_measure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("measure.json");
    // One node: tau_2 = 0 everywhere, so the variable grids break down.
    fs::write(&spec, r#"{"nodes":["2"],"weights":["1"]}"#).unwrap();
    let out = hqd(&[
        "dump", "--kind", "tau", "--m", "1", "--n", "4", "--l", "6",
        "--measure", spec.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn worker_env_var_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_hqd"))
        .args(["verify", "--suite", "dhlv", "--m", "1,2", "--n", "3", "--l", "4", "--seed", "2"])
        .env("HQD_WORKERS", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // Deterministic assembly order regardless of worker count.
    assert_eq!(report["suites"][0]["m"], 1);
    assert_eq!(report["suites"][1]["m"], 2);
}

#[test]
fn relation_reports_follow_documented_shape() {
    let out = hqd(&[
        "verify", "--suite", "elliptic", "--m", "2", "--n", "3", "--l", "3", "--seed", "6",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let relations = report["suites"][0]["relations"].as_array().unwrap();
    assert_eq!(relations.len(), 18);
    let r19 = relations.iter().find(|r| r["relation"] == "R19").unwrap();
    assert_eq!(r19["m"], 2);
    assert!(r19["sites_checked"].as_u64().unwrap() > 0);
    assert_eq!(r19["failures"].as_array().unwrap().len(), 0);
}
