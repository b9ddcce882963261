use std::f64::consts::PI;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teleswitch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Parses CSV output into a header and rows of fields.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn fidelity_curves_rows() {
    let (header, rows) = table(&stdout(&["fidelity-curves"]));
    assert_eq!(header, ["p", "F1", "F2", "F_switch_plus", "classical_threshold"]);
    assert_eq!(rows.len(), 335);
    assert_eq!(rows[0], ["0", "1", "1", "1", "0.666666666667"]);
    let last = rows.last().unwrap();
    assert!((num(&last[0]) - 1.0 / 3.0).abs() < 1e-11);
    assert_eq!(last[3], "1");

    let (_, rows) = table(&stdout(&["fidelity-curves", "--p-min", "0.105662", "--p-max", "0.105662"]));
    assert_eq!(rows.len(), 1);
    assert!((num(&rows[0][2]) - 2.0 / 3.0).abs() < 1e-6);
}

#[test]
fn floats_carry_twelve_significant_digits() {
    let (_, rows) = table(&stdout(&["fidelity-curves", "--p-min", "0.1", "--p-max", "0.1"]));
    // F_switch at p = 0.1, q = 1/2 is 1.32 / 1.88 (closed form with mu = 1/2)
    assert_eq!(rows[0][3], "0.702127659574");
}

#[test]
fn region_map_rows() {
    let (header, rows) = table(&stdout(&["region-map"]));
    assert_eq!(header, ["mu", "p_lo", "p_hi", "region2_exists"]);
    let find = |mu: f64| rows.iter().find(|r| (num(&r[0]) - mu).abs() < 1e-11).unwrap();
    assert_eq!(find(1.0 / 6.0)[3], "false");
    assert_eq!(find(0.4)[3], "true");
    assert!((num(&find(0.0)[1]) - 0.105662).abs() < 1e-6);

    let (header, rows) = table(&stdout(&["region-map", "--table", "surface", "--p-step", "0.1", "--q-step", "0.5"]));
    assert_eq!(header, ["p", "q", "F"]);
    assert_eq!(rows.len(), 5 * 3);
}

#[test]
fn fom_scan_argmax_is_plus() {
    let (header, rows) = table(&stdout(&["fom-scan"]));
    assert_eq!(header, ["lambda", "phi", "K"]);
    assert_eq!(rows.len(), 41 * 180);
    let k = column(&header, "K");
    let best = rows
        .iter()
        .max_by(|a, b| num(&a[k]).total_cmp(&num(&b[k])))
        .unwrap();
    assert_eq!((best[0].as_str(), best[1].as_str()), ("1", "0"));
}

#[test]
fn coherence_scan_incoherent_end() {
    let (header, rows) = table(&stdout(&["coherence-scan", "--q-step", "0.5"]));
    let (c, k) = (column(&header, "coherence"), column(&header, "K_optimal"));
    let incoherent = rows.iter().find(|r| num(&r[c]) == 0.0).unwrap();
    assert!((num(&incoherent[k]) - 0.016038).abs() < 1e-6);
    let half = rows.iter().find(|r| r[0] == "0.5").unwrap();
    assert!((num(&half[c]) - 1.0).abs() < 1e-12);
}

#[test]
fn tradeoff_curves_meet_without_superposition() {
    let (header, rows) = table(&stdout(&["tradeoff", "--q-step", "1"]));
    assert_eq!(header, ["q", "K_total", "K", "outcome_label"]);
    let at_one: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == "1").collect();
    assert_eq!(at_one.len(), 4);
    // |1⟩ cannot occur when the control is |0⟩; the others coincide
    let reachable: Vec<&Vec<String>> = at_one.iter().copied().filter(|r| !r[2].is_empty()).collect();
    assert_eq!(reachable.len(), 3);
    assert!(reachable.iter().all(|r| r[1] == reachable[0][1] && r[2] == reachable[0][2]));
    assert_eq!(at_one.iter().find(|r| r[2].is_empty()).unwrap()[3], "1");

    let (_, rows) = table(&stdout(&["tradeoff", "--q-step", "0.5", "--outcome", "custom", "--lambda", "1", "--phi", "0"]));
    let plus = table(&stdout(&["tradeoff", "--q-step", "0.5", "--outcome", "plus"])).1;
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().zip(&plus).all(|(a, b)| a[..3] == b[..3] && a[3] == "custom"));
}

#[test]
fn three_path_alpha_curves() {
    let (header, rows) = table(&stdout(&["three-path", "--p-step", "0.05"]));
    assert_eq!(
        header,
        ["p", "F_1_1_1", "F_0_0_0", "F_-1_-1_0", "F_-1_-1_-1", "F_no_switch", "annotation"]
    );
    let alt = column(&header, "F_-1_-1_-1");
    let last = rows.last().unwrap();
    assert!((num(&last[alt]) - 1.0).abs() < 1e-9);
    assert!(rows[0][column(&header, "annotation")].contains("degenerate -1_-1_-1"));
    assert!(rows[1][column(&header, "annotation")].is_empty());
    for r in &rows {
        let p = num(&r[0]);
        let expected = 0.5 + 0.5 * (1.0 - 4.0 * p).powi(3);
        assert!((num(&r[column(&header, "F_no_switch")]) - expected).abs() < 1e-11);
    }

    let (header, rows) = table(&stdout(&["three-path", "--alpha", "-1,-1,-1", "--p-step", "0.1"]));
    assert_eq!(header, ["p", "F_-1_-1_-1", "F_no_switch", "annotation"]);
    assert_eq!(rows.len(), 5);
}

#[test]
fn three_path_phase_scan_peaks_near_pi_over_12() {
    let (header, rows) = table(&stdout(&["three-path", "--table", "phase", "--lambda", "1"]));
    assert_eq!(header, ["phi", "lambda", "K"]);
    assert_eq!(rows.len(), 360);
    // first maximum in scan order, matching the library's tie-breaking
    let mut best = &rows[0];
    for r in &rows {
        if num(&r[2]) > num(&best[2]) + 1e-12 {
            best = r;
        }
    }
    assert!((num(&best[0]) - PI / 12.0).abs() <= PI / 36.0);
}

#[test]
fn json_output_round_trips() {
    let csv_text = stdout(&["fidelity-curves", "--p-step", "0.05"]);
    let json_text = stdout(&["fidelity-curves", "--p-step", "0.05", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json_text).unwrap();
    let (header, rows) = table(&csv_text);
    let names: Vec<&str> = v["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, header);
    let json_rows = v["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), rows.len());
    for (j, c) in json_rows.iter().zip(&rows) {
        for (x, s) in j.as_array().unwrap().iter().zip(c) {
            assert_eq!(x.as_f64().unwrap(), num(s));
        }
    }
    let again: serde_json::Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(again, v);
}

#[test]
fn out_file_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curves.csv");
    let out = run(&["fidelity-curves", "--p-step", "0.1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let (header, rows) = table(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(header.len(), 5);
    assert_eq!(rows.len(), 5);
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("curves.csv.schema.json")).unwrap()).unwrap();
    assert_eq!(schema["columns"].as_array().unwrap().len(), 5);
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "p-step = 0.1\nq = 1.0\n").unwrap();
    let cfg = path.to_str().unwrap();
    let (_, from_file) = table(&stdout(&["fidelity-curves", "--config", cfg]));
    assert_eq!(from_file.len(), 5);
    // q = 1 is a definite order, so the switched curve equals F2
    assert!(from_file.iter().all(|r| (num(&r[3]) - num(&r[2])).abs() < 1e-11));
    let (_, overridden) = table(&stdout(&["fidelity-curves", "--config", cfg, "--q", "0.5"]));
    assert_eq!(overridden.len(), 5);
    assert_eq!(overridden.last().unwrap()[3], "1");

    std::fs::write(&path, "no-such-key = 1\n").unwrap();
    assert_eq!(run(&["fidelity-curves", "--config", cfg]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["fidelity-curves", "--p-min", "0.2", "--p-max", "0.1"][..],
        &["fidelity-curves", "--q", "1.5"],
        &["fidelity-curves", "--p-step", "0"],
        &["fom-scan", "--paths", "5"],
        &["three-path", "--paths", "2"],
        &["three-path", "--alpha", "1,2"],
        &["region-map", "--table", "nope"],
        &["no-such-command"],
        &["fidelity-curves", "--format", "xml"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn unreachable_outcome_leaves_k_empty() {
    // at q = 0 the control is |1⟩, so outcome |0⟩ never fires
    let (_, rows) = table(&stdout(&["tradeoff", "--q-step", "1", "--outcome", "0"]));
    assert!(rows[0][2].is_empty());
    assert_eq!(rows[0][3], "0");
}

#[test]
fn commands_are_deterministic() {
    for args in [
        &["fom-scan", "--lambda-step", "0.5", "--phi-step", "0.5"][..],
        &["three-path", "--p-step", "0.01"],
        &["tradeoff", "--q-step", "0.25"],
    ] {
        assert_eq!(stdout(args), stdout(args), "{args:?}");
    }
}

#[test]
fn verify_report() {
    let first = run(&["verify"]);
    let second = run(&["verify"]);
    assert_eq!(first.stdout, second.stdout);
    let report: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 12);
    let all_passed = checks.iter().all(|c| c["passed"].as_bool().unwrap());
    assert_eq!(report["passed"].as_bool().unwrap(), all_passed);
    assert_eq!(first.status.code(), Some(if all_passed { 0 } else { 2 }));

    let csv_report = stdout_allowing_failure(&["verify", "--format", "csv"]);
    let (header, rows) = table(&csv_report);
    assert_eq!(header, ["name", "passed", "detail"]);
    assert_eq!(rows.len(), checks.len());
}

fn stdout_allowing_failure(args: &[&str]) -> String {
    String::from_utf8(run(args).stdout).unwrap()
}
