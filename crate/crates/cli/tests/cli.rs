use std::collections::BTreeMap;
use std::process::{Command, Output};

use serde_json::Value;

fn cvqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvqkd"))
        .args(args)
        .env_remove("CVQKD_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = cvqkd(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn status(args: &[&str]) -> i32 {
    cvqkd(args).status.code().expect("exit code")
}

/// Header and numeric rows of a CSV document.
fn table(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn validate(schema: &str, doc: &Value) {
    let schema: Value = serde_json::from_str(schema).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

const TABLE_SCHEMA: &str = include_str!("../schema/table.schema.json");
const REPORT_SCHEMA: &str = include_str!("../schema/simulate-report.schema.json");

#[test]
fn fig6_curves_are_ordered_by_excess_noise() {
    let (header, rows) = table(&ok(&["keyrate", "--preset", "fig6", "--distances", "0:300:31"]));
    assert_eq!(header, ["distance_km", "T_eff", "xi", "V_A", "I_xy", "S_yE", "K"]);
    assert_eq!(rows.len(), 5 * 31);
    let mut by_distance: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &rows {
        by_distance.entry(r[0].to_bits()).or_default().push((r[2], r[6]));
    }
    for curves in by_distance.values() {
        assert_eq!(curves.iter().map(|c| c.0).collect::<Vec<_>>(), [0.002, 0.004, 0.006, 0.008, 0.01]);
        assert!(curves.windows(2).all(|w| w[1].1 < w[0].1), "{curves:?}");
    }
    let at_10 = rows.iter().find(|r| r[0] == 10.0 && r[2] == 0.002).unwrap();
    assert!(at_10[6] > 0.0);
}

#[test]
fn best_case_link_has_key() {
    let (_, rows) = table(&ok(&["keyrate", "--xi", "0", "--beta", "1", "--distances", "0"]));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1], 0.6);
    assert!(rows[0][6] > 0.0);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(status(&["keyrate", "--distances", "0:100:0"]), 2);
    assert_eq!(status(&["keyrate", "--distances", ""]), 2);
    assert_eq!(status(&["keyrate", "--va", "0.25", "--alpha", "0.3"]), 2);
    assert_eq!(status(&["keyrate", "--beta", "1.5"]), 2);
    assert_eq!(status(&["keyrate", "--distances", "-5"]), 2);
    assert_eq!(status(&["capacity", "--snr", "0,1"]), 2);
    assert_eq!(status(&["wigner", "--state", "cat"]), 2);
    assert_eq!(status(&["wigner", "--state", "psi", "--alpha", "0.5", "--index", "4"]), 2);
    assert_eq!(status(&["simulate", "--samples", "0"]), 2);
    assert_eq!(status(&["frobnicate"]), 2);
}

#[test]
fn unsupported_configuration_exits_with_three() {
    let args = ["keyrate", "--modulation", "two-state", "--detection", "heterodyne", "--distances", "5"];
    assert_eq!(status(&args), 3);
    assert_eq!(status(&["simulate", "--code", "/nonexistent/code.alist"]), 3);
}

#[test]
fn fig4_preset_optimizes_the_variance() {
    let (_, rows) = table(&ok(&["keyrate", "--preset", "fig4", "--distances", "0,10"]));
    assert_eq!(rows.len(), 6);
    let k = |xi: f64, d: f64| rows.iter().find(|r| r[2] == xi && r[0] == d).unwrap()[6];
    assert!(k(0.001, 10.0) > 0.0);
    assert!(k(0.0015, 0.0) > 0.0 && k(0.0015, 10.0) < 0.0);
    assert!(k(0.002, 0.0) < 0.0);
    // Optimal mean photon numbers V_A/2 stay in the 0.01 to 0.03 band.
    assert!(rows.iter().all(|r| (0.02..=0.06).contains(&r[3])), "{rows:?}");
}

#[test]
fn capacity_table() {
    let (header, rows) = table(&ok(&["capacity", "--snr", "3"]));
    assert_eq!(header, ["s", "C_Gauss", "C_BI-AWGN", "ratio"]);
    assert!((rows[0][1] - 1.0).abs() < 1e-12);

    let (_, rows) = table(&ok(&["capacity", "--preset", "fig7"]));
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().all(|r| r[2] <= r[1]));
    assert!(rows[0][0] <= 1.0001e-3 && rows[0][3] > 0.999);
    assert!(rows.windows(2).all(|w| w[1][3] <= w[0][3] + 1e-12), "ratio falls with SNR");
}

#[test]
fn correlation_table_is_ordered() {
    let (header, rows) = table(&ok(&["correlation", "--preset", "fig5"]));
    assert_eq!(header, ["V_A", "Z_two", "Z_four", "Z_gauss"]);
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r[1] < r[2] && r[2] < r[3]));
}

#[test]
fn json_tables_match_the_schema() {
    for args in [
        &["keyrate", "--preset", "fig6-het", "--distances", "0:40:5", "--format", "json"][..],
        &["capacity", "--format", "json"],
        &["correlation", "--va", "0.1,0.5", "--format", "json"],
    ] {
        let doc: Value = serde_json::from_str(&ok(args)).unwrap();
        validate(TABLE_SCHEMA, &doc);
        assert_eq!(doc["metadata"]["fibre_loss_db_per_km"], 0.2);
    }
    let schema: Value = serde_json::from_str(&ok(&["schema", "table"])).unwrap();
    assert_eq!(schema, serde_json::from_str::<Value>(TABLE_SCHEMA).unwrap());
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let args = ["keyrate", "--distances", "0:20:3", "--xi", "0.001,0.01"];
    let (header, rows) = table(&ok(&args));
    let doc: Value = serde_json::from_str(&ok(&[&args[..], &["--format", "json"]].concat())).unwrap();
    let json_rows = doc["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), rows.len());
    for (row, obj) in rows.iter().zip(json_rows) {
        for (name, v) in header.iter().zip(row) {
            assert_eq!(obj[name].as_f64().unwrap(), *v);
        }
    }
}

#[test]
fn output_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cap.csv");
    let stdout = ok(&["capacity", "--snr", "1", "-o", path.to_str().unwrap()]);
    assert!(stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), ok(&["capacity", "--snr", "1"]));
}

fn report(args: &[&str]) -> Value {
    let doc: Value = serde_json::from_str(&ok(&[&["simulate"][..], args].concat())).unwrap();
    validate(REPORT_SCHEMA, &doc);
    doc
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--samples", "200000", "--seed", "42"];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    assert_ne!(a, ok(&["simulate", "--samples", "200000", "--seed", "43"]));
}

#[test]
fn seed_comes_from_the_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_cvqkd"));
        cmd.args([&["simulate", "--samples", "150000"][..], extra].concat());
        match env {
            Some(s) => cmd.env("CVQKD_SEED", s),
            None => cmd.env_remove("CVQKD_SEED"),
        };
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let from_env = run(Some("99"), &[]);
    assert_eq!(from_env, run(None, &["--seed", "99"]));
    let doc: Value = serde_json::from_slice(&from_env).unwrap();
    assert_eq!(doc["config"]["seed"], 99);
    // An explicit flag wins over the environment.
    assert_eq!(run(Some("99"), &["--seed", "5"]), run(None, &["--seed", "5"]));
}

#[test]
fn noiseless_link_gives_matching_keys() {
    let doc = report(&["--distance", "0", "--eta", "1", "--xi", "0", "--samples", "256000"]);
    let est = &doc["estimated"];
    // sd of ξ̂ is about √2/√n here.
    assert!(est["xi"].as_f64().unwrap() < 4.0 * (2.0f64 / 256000.0).sqrt());
    assert!((est["t_eff"].as_f64().unwrap() - 1.0).abs() < 0.01);
    let rec = &doc["reconciliation"];
    assert_eq!(rec["k"], 1);
    assert_eq!(rec["frames"], 4);
    assert_eq!(rec["failed_frames"], 0);
    assert_eq!(rec["keys_match"], true);
    assert_eq!(rec["key_bits"], 4 * 64000);
}

#[test]
fn default_run_recovers_the_channel() {
    let doc = report(&[]);
    let cfg = &doc["config"];
    assert_eq!(cfg["distance_km"], 10.0);
    assert_eq!(cfg["xi"], 0.005);
    assert_eq!(cfg["symbols"], 1_000_000);
    let est = &doc["estimated"];
    let t = cfg["t_eff"].as_f64().unwrap();
    let v_a = cfg["v_a"].as_f64().unwrap();
    assert!((est["v_a"].as_f64().unwrap() / v_a - 1.0).abs() < 0.05);
    assert!((est["t_eff"].as_f64().unwrap() / t - 1.0).abs() < 0.05);
    // A 5% bound on ξ̂ = 0.005 is far below its sampling error at 10⁶
    // symbols; use four delta-method standard deviations instead.
    let n = 1e6;
    let sigma2 = 1.0 + t * 0.005;
    let sd_t = 2.0 * (t * sigma2 / (n * v_a)).sqrt();
    let sd_y2 = ((4.0 * t * v_a * sigma2 + 2.0 * sigma2 * sigma2) / n).sqrt();
    let sd_xi = sd_y2 / t + (sigma2 - 1.0 + t * v_a) * sd_t / (t * t);
    assert!((est["xi"].as_f64().unwrap() - 0.005).abs() < 4.0 * sd_xi);

    let rec = &doc["reconciliation"];
    assert_eq!(rec["k"], 2, "0.095 per sample needs two repetitions to reach 0.17");
    assert_eq!(rec["keys_match"], true);
    assert!(rec["key_bits"].as_u64().unwrap() > 0);
    assert!(doc["prediction"]["configured"]["k"].as_f64().unwrap() > 0.0);
}

#[test]
fn short_runs_and_gaussian_modulation_report_no_key() {
    let doc = report(&["--samples", "1000"]);
    let rec = &doc["reconciliation"];
    assert_eq!(rec["frames"], 0);
    assert_eq!(rec["key_bits"], 0);
    assert!(rec["fer"].is_null());

    let doc = report(&["--modulation", "gaussian", "--samples", "20000"]);
    assert!(doc["reconciliation"].is_null());
    assert_eq!(doc["config"]["modulation"], "gaussian");
}

#[test]
fn custom_alist_code() {
    use cvqkd::reconciliation::construction::{met_code, MetProfile};
    let profile = MetProfile {
        core_vars: vec![(400, 2, 21), (400, 3, 21)],
        core_checks: vec![(80, 12), (80, 13)],
        ldgm_degree: 3,
    };
    let code = met_code(&profile, 7).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.alist");
    std::fs::write(&path, code.to_alist()).unwrap();
    let p = path.to_str().unwrap();

    let base = ["simulate", "--distance", "0", "--eta", "1", "--xi", "0", "--samples", "64000", "--code", p];
    // The alist format does not record a design SNR.
    assert_eq!(status(&base), 2);
    let doc: Value = serde_json::from_str(&ok(&[&base[..], &["--k", "1"]].concat())).unwrap();
    let rec = &doc["reconciliation"];
    assert_eq!(rec["code"]["n"], 6400);
    assert_eq!(rec["code"]["source"], p);
    assert_eq!(rec["frames"], 10);
    assert_eq!(rec["keys_match"], true);
}

#[test]
fn heterodyne_and_uniform_noise_runs() {
    let doc = report(&["--detection", "heterodyne", "--noise", "uniform", "--samples", "200000"]);
    assert_eq!(doc["config"]["noise"], "uniform");
    assert_eq!(doc["estimated"]["samples"], 400_000);
    let doc = report(&["--noise", "student-t", "--nu", "6", "--samples", "50000"]);
    assert_eq!(doc["config"]["noise"]["student-t"]["nu"], 6.0);
}

fn wigner_rows(args: &[&str]) -> Vec<Vec<f64>> {
    let (header, rows) = table(&ok(&[&["wigner"][..], args].concat()));
    assert_eq!(header, ["x", "p", "W"]);
    rows
}

#[test]
fn two_state_psi_peaks_in_the_first_quadrant() {
    let rows = wigner_rows(&["--state", "psi", "--constellation", "two", "--alpha2", "0.01", "--grid", "-3:3:61"]);
    let peak = rows.iter().max_by(|a, b| a[2].total_cmp(&b[2])).unwrap();
    assert!(peak[0] > 0.0 && peak[1] > 0.0, "{peak:?}");
}

#[test]
fn vacuum_is_a_symmetric_gaussian() {
    let rows = wigner_rows(&["--state", "vacuum", "--grid", "-3:3:31"]);
    let n = 31;
    let w = |i: usize, j: usize| rows[i * n + j][2];
    for i in 0..n {
        for j in 0..n {
            assert!((w(i, j) - w(n - 1 - i, j)).abs() < 1e-12);
            assert!((w(i, j) - w(i, n - 1 - j)).abs() < 1e-12);
            assert!((w(i, j) - w(j, i)).abs() < 1e-12);
        }
    }
    // Unit-variance Gaussian: W(0, 0) = 1/(2π).
    assert!((w(15, 15) - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-9);
}

#[test]
fn four_state_psi_turns_by_quarter_periods() {
    let grid = ["--grid", "-4:4:41", "--alpha", "0.7"];
    let w0 = wigner_rows(&[&["--state", "psi"][..], &grid].concat());
    let w1 = wigner_rows(&[&["--state", "psi", "--index", "1"][..], &grid].concat());
    let n = 41;
    for i in 0..n {
        for j in 0..n {
            let rotated = w0[j * n + (n - 1 - i)][2];
            assert!((w1[i * n + j][2] - rotated).abs() < 1e-10, "({i}, {j})");
        }
    }
}

#[test]
fn coherent_selector_centres_on_the_symbol() {
    // k = 0 of the four-state constellation sits at angle π/4: (x, p) = (2α cos, 2α sin).
    let rows = wigner_rows(&["--state", "coherent", "--alpha", "1", "--grid", "-3:3:121"]);
    let peak = rows.iter().max_by(|a, b| a[2].total_cmp(&b[2])).unwrap();
    let c = 2.0 * std::f64::consts::FRAC_1_SQRT_2;
    assert!((peak[0] - c).abs() <= 0.05 && (peak[1] - c).abs() <= 0.05, "{peak:?}");
}
