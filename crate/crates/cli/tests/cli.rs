use std::path::Path;
use std::process::{Command, Output};

use wiretap_cli::{validate_spec_str, CSV_HEADER};

fn wiretap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wiretap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv_text: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    assert_eq!(
        r.headers().unwrap(),
        &csv::StringRecord::from(CSV_HEADER.to_vec())
    );
    r.records().map(|x| x.unwrap()).collect()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn bsc_n400_rates_bracket_the_target_window() {
    let o = wiretap(&[
        "bsc", "--p", "0.11", "--n-min", "400", "--n-max", "400", "--eps", "1e-3", "--delta",
        "1e-3", "--bounds", "ach,conv",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rs = rows(&stdout(&o));
    assert_eq!(rs.len(), 2);
    let rate = |kind: &str| -> f64 {
        rs.iter().find(|r| &r[1] == kind).unwrap()[2]
            .parse()
            .unwrap()
    };
    let (a, c) = (rate("ach"), rate("conv"));
    assert!(0.33 <= a && a <= c && c <= 0.37, "ach {a} conv {c}");
}

#[test]
fn rows_are_sorted_and_headers_appear_once() {
    let o = wiretap(&[
        "bsc",
        "--p",
        "0.11",
        "--n-min",
        "50",
        "--n-max",
        "70",
        "--n-step",
        "10",
        "--eps",
        "1e-2",
        "--delta",
        "1e-2",
        "--bounds",
        "conv,approx,ach",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.matches("rate_bits").count(), 1);
    let keys: Vec<(u64, String)> = rows(&text)
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].to_owned()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(keys.len(), 9);
}

#[test]
fn bad_requests_exit_with_validation_code() {
    let base = [
        "bsc", "--n-min", "10", "--n-max", "20", "--eps", "0.01", "--delta", "0.01",
    ];
    let with = |extra: &[&str]| {
        let mut a = base.to_vec();
        a.extend_from_slice(extra);
        code(&wiretap(&a))
    };
    assert_eq!(with(&["--p", "0.11", "--bounds", ""]), 2);
    assert_eq!(with(&["--p", "0.7"]), 2);
    assert_eq!(with(&["--p", "0.11", "--n-step", "0"]), 2);
    assert_eq!(
        code(&wiretap(&[
            "bsc", "--p", "0.1", "--n-min", "30", "--n-max", "20", "--eps", "0.1", "--delta", "0.1"
        ])),
        2
    );
}

#[test]
fn gaussian_monte_carlo_requires_a_seed() {
    let args = [
        "gaussian",
        "--snr-legit-db",
        "3",
        "--snr-eve-db",
        "-3",
        "--n-min",
        "100",
        "--n-max",
        "100",
        "--eps",
        "1e-3",
        "--delta",
        "1e-3",
    ];
    let o = wiretap(&args);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    // Closed-form rows alone need no seed.
    let mut a = args.to_vec();
    a.extend(["--bounds", "approx"]);
    assert_eq!(code(&wiretap(&a)), 0);
}

#[test]
fn gaussian_output_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str, name: &str| {
        let out = dir.path().join(name);
        let o = wiretap(&[
            "gaussian",
            "--snr-legit-db",
            "3",
            "--snr-eve-db",
            "-3",
            "--n-min",
            "200",
            "--n-max",
            "200",
            "--eps",
            "1e-3",
            "--delta",
            "1e-3",
            "--seed",
            "11",
            "--samples",
            "20000",
            "--bootstrap",
            "10",
            "--workers",
            workers,
            "--bounds",
            "ach,conv",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("3", "b.csv");
    assert_eq!(a, b);
    assert!(!a.is_empty());
}

#[test]
fn unwritable_output_exits_with_io_code() {
    let o = wiretap(&[
        "bsc",
        "--p",
        "0.11",
        "--n-min",
        "10",
        "--n-max",
        "10",
        "--eps",
        "0.01",
        "--delta",
        "0.01",
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(code(&o), 4);
}

#[test]
fn infeasible_everywhere_exits_with_code_3() {
    // Tiny n with tight secrecy: every row is infeasible or inapplicable.
    let o = wiretap(&[
        "bsc", "--p", "0.11", "--n-min", "1", "--n-max", "2", "--eps", "1e-6", "--delta", "1e-6",
        "--bounds", "ach",
    ]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
    assert!(stdout(&o).contains("infeasible"));
}

#[test]
fn validate_accepts_a_good_spec() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "ok.json",
        r#"{"legit":[[1,0],[0,1]],"eve":[[0.9,0.1],[0.1,0.9]],
            "tags":{"degraded":false,"semi_deterministic":true}}"#,
    );
    let o = wiretap(&["validate", &p]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("ok"));
}

#[test]
fn validate_names_the_row_with_a_mass_defect() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bad.json",
        r#"{"legit":[[0.5,0.5],[0.49,0.49]],"eve":[[1],[1]],"tags":{"degraded":false,"semi_deterministic":false}}"#,
    );
    let o = wiretap(&["validate", &p]);
    assert_eq!(code(&o), 2);
    let text = stdout(&o);
    assert!(text.contains("legit row 1"), "{text}");
    assert!(text.contains("0.98"), "{text}");
}

#[test]
fn validate_reports_tag_contradiction_and_all_other_problems() {
    let r = validate_spec_str(
        r#"{"legit":[[0.5,0.5],[0,1]],"eve":[[1,0]],"tags":{"semi_deterministic":true}}"#,
    );
    let all = r.errors.join("\n");
    assert!(all.contains("tag contradiction"), "{all}");
    assert!(all.contains("legit row 0"), "{all}");
    assert!(all.contains("shape mismatch"), "{all}");
    assert!(r.warnings.iter().any(|w| w.contains("degraded")));
}

#[test]
fn validate_reports_position_of_malformed_json() {
    let r = validate_spec_str("{\"legit\": [[1, 0],\n  [0, 1]\n,}");
    assert_eq!(r.errors.len(), 1);
    assert!(r.errors[0].contains("line 3"), "{}", r.errors[0]);
    let r = validate_spec_str(r#"{"legit":[[1,"a"]],"eve":[[1,0,0],[1]]}"#);
    let all = r.errors.join("\n");
    assert!(all.contains("not a finite number"), "{all}");
    assert!(all.contains("eve row 1 has 1 entries"), "{all}");
}

#[test]
fn missing_spec_file_exits_with_io_code() {
    assert_eq!(code(&wiretap(&["validate", "/nonexistent/spec.json"])), 4);
}

#[test]
fn dmc_semi_deterministic_bsc_matches_bsc_approximation() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bsc.json",
        r#"{"legit":[[1,0],[0,1]],"eve":[[0.89,0.11],[0.11,0.89]],
            "tags":{"degraded":true,"semi_deterministic":true}}"#,
    );
    let args = [
        "--n-min", "200", "--n-max", "200", "--eps", "1e-3", "--delta", "1e-3", "--bounds",
        "approx",
    ];
    let mut d = vec!["dmc", "--spec", &p];
    d.extend(args);
    let mut b = vec!["bsc", "--p", "0.11"];
    b.extend(args);
    let (od, ob) = (wiretap(&d), wiretap(&b));
    assert_eq!(code(&od), 0);
    let rd: f64 = rows(&stdout(&od))[0][2].parse().unwrap();
    let rb: f64 = rows(&stdout(&ob))[0][2].parse().unwrap();
    assert!((rd - rb).abs() < 1e-6, "{rd} vs {rb}");
}

#[test]
fn dmc_general_channel_emits_both_expansion_rows() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "g.json",
        r#"{"legit":[[0.95,0.05],[0.05,0.95]],"eve":[[0.8,0.2],[0.2,0.8]],
            "tags":{"degraded":true,"semi_deterministic":false}}"#,
    );
    let o = wiretap(&[
        "dmc", "--spec", &p, "--n-min", "500", "--n-max", "500", "--eps", "0.01", "--delta",
        "0.01", "--bounds", "approx", "--format", "json",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let kinds: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["approx_ach", "approx_conv"]);
    let a = v[0]["rate_bits"].as_f64().unwrap();
    let c = v[1]["rate_bits"].as_f64().unwrap();
    assert!(0.0 < a && a < c, "{a} {c}");
}

#[test]
fn pa_report_is_bracketed_by_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "pa.json",
        r#"{"joint":[[0.2,0.05],[0.05,0.2],[0.15,0.1],[0.1,0.15]],"key_size":2}"#,
    );
    let o = wiretap(&["pa", "--spec", &p]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let conv = v["converse"].as_f64().unwrap();
    let best = v["oracle_s_avg"].as_f64().unwrap();
    let ach = v["avg_bound"]["total"].as_f64().unwrap();
    assert!(
        conv <= best + 1e-12 && best <= ach + 1e-12,
        "{conv} {best} {ach}"
    );
    let o = wiretap(&["pa", "--spec", &p, "--format", "csv"]);
    assert!(stdout(&o).starts_with("quantity,value\n"));
}
