//! Black-box checks of the `lightwork` binary: output determinism, format
//! round-trips, exit codes, and config handling.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lightwork"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn lightwork")
}

fn stdout_of(args: &[&str]) -> Vec<u8> {
    let out = run(args);
    assert!(
        out.status.success(),
        "lightwork {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lightwork-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Parse a commented CSV body into (meta keys, header, rows).
fn parse_csv(bytes: &[u8]) -> (Vec<String>, Vec<String>, Vec<Vec<String>>) {
    let text = String::from_utf8(bytes.to_vec()).expect("csv output is utf-8");
    let mut meta = Vec::new();
    let mut lines = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            meta.push(rest.to_string());
        } else if !line.is_empty() {
            lines.push(line);
        }
    }
    let body = lines.join("\n");
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(body.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .unwrap()
        .iter()
        .map(str::to_string)
        .collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect();
    (meta, header, rows)
}

fn cell(header: &[String], row: &[String], name: &str) -> f64 {
    let idx = header.iter().position(|h| h == name).expect(name);
    row[idx].parse().expect(name)
}

#[test]
fn reversible_csv_round_trips_with_units_header() {
    let bytes = stdout_of(&["reversible", "--nbar", "20", "--nbar-cold", "1", "--modes", "2"]);
    let (meta, header, rows) = parse_csv(&bytes);
    assert!(meta.iter().any(|m| m.starts_with("units:")));
    assert!(meta.iter().any(|m| m == "table: reversible"));
    assert_eq!(rows.len(), 1);
    let work = cell(&header, &rows[0], "work");
    assert!((work - 11.0).abs() < 0.1, "work = {work}");
    let eff = cell(&header, &rows[0], "efficiency");
    assert!((eff - work / 20.0).abs() < 1e-12);
}

#[test]
fn json_output_is_valid_and_self_describing() {
    let bytes = stdout_of(&["photocount", "--nbar", "20", "--kappa-sq", "0.9", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&bytes).expect("valid json");
    assert_eq!(doc["tool"], "lightwork");
    assert_eq!(doc["table"], "photocount");
    let cols: Vec<&str> = doc["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    let idx = cols.iter().position(|&c| c == "transmitted_energy").unwrap();
    let val = doc["rows"][0][idx].as_f64().unwrap();
    assert!((val - 18.0).abs() < 1e-12);
}

#[test]
fn byte_identical_reruns_and_worker_invariance() {
    let args = [
        "mc-verify",
        "photocount-work",
        "--nbar",
        "15",
        "--kappa-sq",
        "0.8",
        "--samples",
        "20000",
        "--seed",
        "9",
    ];
    let first = stdout_of(&args);
    let second = stdout_of(&args);
    assert_eq!(first, second, "rerun changed the output bytes");

    let mut one = args.to_vec();
    one.extend(["--workers", "1"]);
    let mut five = args.to_vec();
    five.extend(["--workers", "5"]);
    assert_eq!(
        stdout_of(&one),
        stdout_of(&five),
        "worker count leaked into the output"
    );

    let doc: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert!(doc["z_score"].as_f64().unwrap().abs() < 4.5);
}

#[test]
fn figures_carry_their_frozen_constants() {
    let bytes = stdout_of(&["figure", "sign-efficiency"]);
    let (_, header, rows) = parse_csv(&bytes);
    let tau_inv = 1.0 / std::f64::consts::TAU;
    for row in &rows {
        let ceiling = cell(&header, row, "ceiling");
        assert_eq!(ceiling, tau_inv);
        assert!(cell(&header, row, "efficiency") < ceiling);
    }

    let bytes = stdout_of(&["figure", "carnot-efficiency"]);
    let (_, header, rows) = parse_csv(&bytes);
    let benchmark = rows
        .iter()
        .find(|r| cell(&header, r, "modes") == 2.0 && cell(&header, r, "nbar") == 20.0)
        .expect("two-mode benchmark row");
    let eff = cell(&header, benchmark, "efficiency");
    assert!((eff - 0.55).abs() < 0.005, "efficiency = {eff}");
}

#[test]
fn sweep_emits_error_rows_instead_of_dying() {
    let config = scratch("sweep.toml");
    fs::write(
        &config,
        r#"
[sweep]
scheme = "erasure"

[sweep.axes.nbar]
kind = "log"
from = 0.05
to = 1e6
points = 5

[sweep.fixed]
nbar_d = 2.0
"#,
    )
    .unwrap();
    let out_path = scratch("sweep.csv");
    let bytes = stdout_of(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(bytes.is_empty(), "--out should silence stdout");
    let (meta, header, rows) = parse_csv(&fs::read(&out_path).unwrap());
    assert!(meta.iter().any(|m| m == "scheme: erasure"));
    assert_eq!(rows.len(), 5);
    let err_idx = header.iter().position(|h| h == "error").unwrap();
    // the smallest occupations sit below the validity threshold
    assert!(!rows[0][err_idx].is_empty());
    assert!(rows[4][err_idx].is_empty());
    let bound = cell(&header, &rows[4], "bound_photocount_small");
    assert!((bound / cell(&header, &rows[4], "bound_entire") - 1.8735418630546294).abs() < 1e-9);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let config = scratch("defaults.toml");
    fs::write(
        &config,
        r#"
[photocount]
nbar = 20.0
kappa_sq = 0.9
"#,
    )
    .unwrap();
    let from_file = stdout_of(&["photocount", "--config", config.to_str().unwrap()]);
    let direct = stdout_of(&["photocount", "--nbar", "20", "--kappa-sq", "0.9"]);
    assert_eq!(from_file, direct);

    let overridden = stdout_of(&[
        "photocount",
        "--config",
        config.to_str().unwrap(),
        "--kappa-sq",
        "0.5",
    ]);
    let (_, header, rows) = parse_csv(&overridden);
    assert_eq!(cell(&header, &rows[0], "kappa_sq"), 0.5);
}

#[test]
fn usage_errors_exit_two_and_domain_errors_exit_three() {
    let usage = run(&["no-such-command"]);
    assert_eq!(usage.status.code(), Some(2));

    let domain = run(&["reversible", "--nbar=-4"]);
    assert_eq!(domain.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&domain.stderr);
    assert!(msg.starts_with("error:"), "stderr = {msg}");

    let bad_config = run(&["nsm", "--config", "/nonexistent/nsm.toml"]);
    assert_eq!(bad_config.status.code(), Some(3));
}

#[test]
fn nsm_cycle_reports_the_hand_checkable_qubit() {
    let config = scratch("nsm.toml");
    fs::write(
        &config,
        r#"
[nsm]
theta_c = 0.4
theta_m = 1.0
h_i = [0.0, 0.7]
h_f = [0.0, 1.5]

[[nsm.kraus]]
re = [[0.5, 0.5], [0.5, 0.5]]

[[nsm.kraus]]
re = [[0.5, -0.5], [-0.5, 0.5]]
"#,
    )
    .unwrap();
    let bytes = stdout_of(&["nsm", "--config", config.to_str().unwrap()]);
    let (_, header, rows) = parse_csv(&bytes);
    let eta = cell(&header, &rows[0], "eta");
    assert!((eta - (1.0 - 0.7 / 1.5)).abs() < 1e-9, "eta = {eta}");
    assert_eq!(cell(&header, &rows[0], "p_nsm_0"), 0.5);
    let q_m = cell(&header, &rows[0], "q_m");
    let p_exc = (-0.7f64).exp() / (1.0 + (-0.7f64).exp());
    assert!((q_m - 1.5 * (0.5 - p_exc)).abs() < 1e-9);
}
