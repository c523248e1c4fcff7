//! End-to-end tests of the `qmdiqkd` binary: exit codes, file formats,
//! determinism, and the attack/verify reports.

use std::path::Path;
use std::process::{Command, Output};

use qmdiqkd_cli::formats::table_from_json_str;
use qmdiqkd_core::tables::ideal_bb84_table;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qmdiqkd"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

const COARSE: &[&str] = &["--grid-u", "41", "--grid-r", "11", "--refine", "1"];

#[test]
fn table_lossless_params_reproduce_ideal_table() {
    let out = run_ok(&["table", "--l-km", "0", "--eta", "1", "--dark", "0"]);
    let table = table_from_json_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(table.max_abs_diff(&ideal_bb84_table()), 0.0);
}

#[test]
fn table_monte_carlo_matches_ideal_within_sampling_error() {
    let out = run_ok(&[
        "table", "--l-km", "0", "--eta", "1", "--dark", "0", "--mc", "--samples", "200000",
        "--seed", "7",
    ]);
    let table = table_from_json_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let ideal = ideal_bb84_table();
    let n = 200_000f64;
    for pair in qmdiqkd_core::tables::SenderPair::ALL {
        for z in 0..3 {
            let expect = ideal.p_idx(z, pair.x(), pair.y());
            let got = table.p_idx(z, pair.x(), pair.y());
            let sigma = (expect * (1.0 - expect) / n).sqrt();
            assert!((got - expect).abs() <= 4.0 * sigma.max(0.0), "z={z} {pair:?}");
        }
    }
}

#[test]
fn table_rejects_invalid_efficiency_with_usage_exit() {
    let out = bin()
        .args(["table", "--eta", "1.5"])
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 64);
}

#[test]
fn unknown_scenario_is_usage_error() {
    let out = bin().args(["attack", "nosuch"]).output().expect("binary runs");
    assert_eq!(exit_code(&out), 64);
}

#[test]
fn keyrate_on_ideal_table_file_is_secure() {
    let dir = tempfile::tempdir().unwrap();
    let table_path = dir.path().join("ideal.json");
    run_ok(&[
        "table", "--l-km", "0", "--eta", "1", "--dark", "0", "--out",
        table_path.to_str().unwrap(),
    ]);
    let out = bin()
        .args(["keyrate", "--table", table_path.to_str().unwrap()])
        .args(COARSE)
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["rate"].as_f64().unwrap() >= 1.0 - 1e-4);
    assert_eq!(v["degenerate"], serde_json::Value::Bool(false));
}

#[test]
fn keyrate_on_degenerate_table_exits_zero_rate() {
    // Merged single-Bell statistics: z=2 never announced.
    let dir = tempfile::tempdir().unwrap();
    let table_path = dir.path().join("merged.json");
    let merged = qmdiqkd_core::attacks::single_bell_merge(&ideal_bb84_table());
    std::fs::write(
        &table_path,
        qmdiqkd_cli::formats::table_to_json_string(&merged),
    )
    .unwrap();
    let out = bin()
        .args(["keyrate", "--table", table_path.to_str().unwrap()])
        .args(COARSE)
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 2);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rate"].as_f64().unwrap(), 0.0);
    assert_eq!(v["degenerate"], serde_json::Value::Bool(true));
}

#[test]
fn keyrate_zero_gain_exits_zero_rate() {
    let out = bin()
        .args(["keyrate", "--l-km", "0", "--eta", "0", "--dark", "0"])
        .args(COARSE)
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn keyrate_truncated_table_file_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let table_path = dir.path().join("bad.json");
    std::fs::write(&table_path, "{\"0,0\": [0.5, 0.5").unwrap();
    let out = bin()
        .args(["keyrate", "--table", table_path.to_str().unwrap()])
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 64);
}

#[test]
fn sweep_is_deterministic_ordered_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |path: &Path| {
        vec![
            "sweep".to_string(),
            "--l-min-km".into(),
            "0".into(),
            "--l-max-km".into(),
            "60".into(),
            "--steps".into(),
            "5".into(),
            "--eta".into(),
            "0.1".into(),
            "--dark".into(),
            "1e-5".into(),
            "--grid-u".into(),
            "41".into(),
            "--grid-r".into(),
            "11".into(),
            "--refine".into(),
            "1".into(),
            "--out".into(),
            path.to_str().unwrap().to_string(),
        ]
    };
    let out = bin().args(args(&a)).output().unwrap();
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = bin().args(args(&b)).output().unwrap();
    assert_eq!(exit_code(&out), 0);
    let csv_a = std::fs::read(&a).unwrap();
    let csv_b = std::fs::read(&b).unwrap();
    assert_eq!(csv_a, csv_b, "sweep output must be byte-identical");

    let text = String::from_utf8(csv_a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("l_km,rate_qmdi,rate_baseline,e_b,e_p,epsilon"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    let mut last_l = f64::NEG_INFINITY;
    let mut last_rate = f64::INFINITY;
    for row in &rows {
        assert!(row[0] > last_l, "rows ordered by distance");
        last_l = row[0];
        assert!(row[2] >= row[1], "baseline dominates at L={}", row[0]);
        assert!(row[1] <= last_rate + 1e-9, "rate non-increasing at L={}", row[0]);
        last_rate = row[1];
        assert!((0.0..=1.0).contains(&row[1]) && (0.0..=1.0).contains(&row[2]));
    }
}

#[test]
fn sweep_rejects_bad_range() {
    let out = bin()
        .args(["sweep", "--l-min-km", "50", "--l-max-km", "10"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 64);
    let out = bin().args(["sweep", "--steps", "1"]).output().unwrap();
    assert_eq!(exit_code(&out), 64);
}

#[test]
fn attack_four_dim_report() {
    let out = bin().args(["attack", "four-dim"]).args(COARSE).output().unwrap();
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["table_match"], serde_json::Value::Bool(true));
    assert!(v["eve_info"].as_f64().unwrap() <= 1e-9);
    assert!(v["violations"].as_array().unwrap().is_empty());
}

#[test]
fn attack_single_bell_report() {
    let out = bin().args(["attack", "single-bell"]).args(COARSE).output().unwrap();
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["indistinguishable"], serde_json::Value::Bool(true));
    assert_eq!(v["rate"].as_f64().unwrap(), 0.0);
    assert_eq!(v["degenerate"], serde_json::Value::Bool(true));
    assert_eq!(v["eve_info"].as_f64().unwrap(), 0.0);
    // the encoding sets ride along in the report
    let enc = qmdiqkd_cli::formats::encoding_set_from_json(&v["alice_encoding"]).unwrap();
    assert!((enc.state(0).overlap_mag(enc.state(2)) - 1.0).abs() < 1e-12);
}

#[test]
fn verify_passes_and_is_seed_stable() {
    let fast = &[
        "verify", "--samples", "100000", "--adv-samples", "500", "--grid-u", "41", "--grid-r",
        "11", "--refine", "1",
    ];
    for seed in ["1", "2"] {
        let out = bin().args(fast).args(["--seed", seed]).output().unwrap();
        assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["all_pass"], serde_json::Value::Bool(true));
        assert_eq!(v["checks"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn verify_detects_understated_epsilon() {
    let out = bin()
        .args([
            "verify", "--samples", "50000", "--adv-samples", "500", "--grid-u", "41", "--grid-r",
            "11", "--refine", "1", "--pad", "-0.5",
        ])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let envelope = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "epsilon-envelope")
        .unwrap();
    assert_eq!(envelope["pass"], serde_json::Value::Bool(false));
}

#[test]
fn failed_run_leaves_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = bin()
        .args(["table", "--eta", "2.0", "--out", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 64);
    assert!(!path.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn table_csv_output() {
    let out = run_ok(&["table", "--l-km", "0", "--eta", "1", "--dark", "0", "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,p0,p1,p2"));
    assert!(text.contains("0,0,0.5,0.5,0"));
}

#[test]
fn keyrate_infeasible_statistics_exits_3() {
    // A table whose feasible set is empty at a 2x1 grid resolution.
    let cols: [[f64; 3]; 8] = [
        [0.0, 1.0, 0.0],
        [0.5, 0.0, 0.5],
        [0.5, 0.0, 0.5],
        [0.5, 0.5, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
    ];
    let table = qmdiqkd_core::tables::OutcomeTable::from_columns(cols).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("infeasible.json");
    std::fs::write(&path, qmdiqkd_cli::formats::table_to_json_string(&table)).unwrap();
    let out_path = dir.path().join("result.json");
    let out = bin()
        .args([
            "keyrate", "--table", path.to_str().unwrap(), "--grid-u", "2", "--grid-r", "1",
            "--refine", "0", "--out", out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out_path.exists(), "no partial output on failure");
}
