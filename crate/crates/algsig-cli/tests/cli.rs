use std::path::Path;
use std::process::{Command, Output};

use algsig::registry::builtin;
use algsig::vector::Interval;
use serde_json::Value;

fn algsig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_algsig")).args(args).env_remove("ALGSIG_DEFAULT_M").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn csv_rows(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column<'a>(header: &[String], rows: &'a [Vec<String>], name: &str) -> Vec<&'a str> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].as_str()).collect()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn density_check_tail_spot_value() {
    let o = algsig(&["density-check", "--m", "1", "--n", "16", "--alpha", "0.5", "--grid", "101"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv_rows(&o.stdout);
    let tail: Vec<_> = rows.iter().filter(|r| r[0] == "tail").cloned().collect();
    assert_eq!(column(&h, &tail, "bound"), ["0.0625"]);
    for margin in column(&h, &rows, "margin") {
        assert!(margin.parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn density_check_flags_violated_hypotheses() {
    let o = algsig(&["density-check", "--n", "4", "--alpha", "0.5", "--grid", "11"]);
    assert_eq!(code(&o), 2);
    let (h, rows) = csv_rows(&o.stdout);
    assert!(column(&h, &rows, "hypotheses_ok").contains(&"false"));
}

#[test]
fn approx_table_round_trips_bit_exactly() {
    let o = algsig(&["approx", "--function", "sin", "--interval", "0", "3.2", "--n", "100", "--m", "1"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv_rows(&o.stdout);
    assert_eq!(h, ["x", "f1", "a1", "error", "denominator"]);
    assert_eq!(rows.len(), 1001);
    let sin = builtin("sin").unwrap();
    let on = Interval::new(0.0, 3.2).unwrap();
    for (x, row) in on.grid(1001).zip(&rows) {
        assert_eq!(row[0].parse::<f64>().unwrap().to_bits(), x.to_bits());
        let fx = sin.eval(x).unwrap().as_scalar().unwrap();
        assert_eq!(row[1].parse::<f64>().unwrap().to_bits(), fx.to_bits());
    }
}

#[test]
fn approx_reproduces_constants() {
    let o = algsig(&["approx", "--function", "constant:2.5", "--interval", "-1", "2", "--n", "37"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv_rows(&o.stdout);
    assert!(column(&h, &rows, "error").iter().all(|e| e.parse::<f64>().unwrap() <= 1e-13));
}

#[test]
fn approx_whole_line() {
    let o = algsig(&[
        "approx",
        "--whole-line",
        "--function",
        "sin",
        "--epsilon",
        "1e-8",
        "--interval",
        "-3",
        "3",
        "--grid",
        "7",
    ]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 7);
    assert!(column(&h, &rows, "error").iter().all(|e| e.parse::<f64>().unwrap() < 1e-3));
}

#[test]
fn fractional_matches_oracles() {
    let o = algsig(&["fractional", "--function", "identity", "--frac-alpha", "0.5", "--side", "left", "--grid", "21"]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv_rows(&o.stdout);
    for (x, oracle) in column(&h, &rows, "x").iter().zip(column(&h, &rows, "oracle")) {
        let x: f64 = x.parse().unwrap();
        assert!((oracle.parse::<f64>().unwrap() - std::f64::consts::FRAC_2_SQRT_PI * x.sqrt()).abs() < 1e-14);
    }
    assert_eq!(column(&h, &rows, "d1")[0].parse::<f64>().unwrap(), 0.0);

    let right = algsig(&["fractional", "--function", "affine:-1,1", "--side", "right", "--grid", "21"]);
    assert_eq!(code(&right), 0);
    let (hr, rr) = csv_rows(&right.stdout);
    let mut left_vals: Vec<f64> = column(&h, &rows, "d1").iter().map(|v| v.parse().unwrap()).collect();
    left_vals.reverse();
    for (l, r) in left_vals.iter().zip(column(&hr, &rr, "d1")) {
        assert!((l - r.parse::<f64>().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn fractional_flags_missing_smoothness() {
    let o = algsig(&["fractional", "--function", "abs:0.5", "--frac-alpha", "1.5", "--side", "left", "--grid", "3"]);
    assert_eq!(code(&o), 2);
    let (h, rows) = csv_rows(&o.stdout);
    assert!(column(&h, &rows, "flag").iter().all(|f| f.contains("capability")));
}

#[test]
fn certify_t11_spot_value() {
    let o = algsig(&[
        "certify",
        "--theorem",
        "T11",
        "--function",
        "identity",
        "--n",
        "100",
        "--alpha",
        "0.5",
        "--m",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let reports = json(&o);
    let rhs = reports[0]["rhs"].as_f64().unwrap();
    assert!((rhs - 5f64.sqrt() * (0.2 + 1.0 / 64.0)).abs() < 1e-15);
    assert_eq!(reports[0]["theorem_id"], "T11");
    assert_eq!(reports[0]["pass"], true);
}

#[test]
fn certify_small_grid_over_all_theorems() {
    let o = algsig(&[
        "certify",
        "--theorem",
        "all",
        "--function",
        "sin",
        "--n",
        "64",
        "--x",
        "0.3,0.7",
        "--grid",
        "101",
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let reports = json(&o);
    let ids: std::collections::BTreeSet<_> =
        reports.as_array().unwrap().iter().map(|r| r["theorem_id"].as_str().unwrap().to_string()).collect();
    assert_eq!(ids.len(), 14);
}

#[test]
fn config_file_with_overrides_and_env_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"function": ["identity"], "n": [64], "alpha": [0.4], "theorem": ["T11"]}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = Command::new(env!("CARGO_BIN_EXE_algsig"))
        .args(["certify", "--config", cfg, "--n", "128", "--format", "json"])
        .env("ALGSIG_DEFAULT_M", "3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let p = &json(&o)[0]["params"];
    assert_eq!(p["n"], 128);
    assert_eq!(p["m"], 3);
    assert_eq!(p["alpha"], 0.4);
    assert_eq!(p["function"], "identity");
}

#[test]
fn jobs_do_not_change_output() {
    let args = |j: &'static str| {
        [
            "certify",
            "--theorem",
            "T11,T14-uniform",
            "--function",
            "sin",
            "--function",
            "exp",
            "--n",
            "32,64",
            "--m",
            "1,2",
            "--N",
            "1,2",
            "--grid",
            "51",
            "--jobs",
            j,
        ]
    };
    let one = algsig(&args("1"));
    let four = algsig(&args("4"));
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn sweep_regimes() {
    let o = algsig(&[
        "sweep",
        "--function",
        "sin",
        "--n",
        "32,64,128,256",
        "--beta",
        "0.5,0.9",
        "--m",
        "1",
        "--grid",
        "201",
    ]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv_rows(&o.stdout);
    let betas = column(&h, &rows, "beta");
    let regimes = column(&h, &rows, "regime");
    for (b, r) in betas.iter().zip(&regimes) {
        assert_eq!(*r, if *b == "0.5" { "modulus-limited" } else { "tail-limited" });
    }
    assert!(column(&h, &rows, "slope").iter().all(|s| s.parse::<f64>().unwrap().is_finite()));
    assert_eq!(code(&algsig(&["sweep", "--n", "32,64"])), 5);
}

#[test]
fn tabulated_input_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("wave.csv");
    let mut text = String::from("x,v1,v2\n");
    for i in 0..=100 {
        let x = f64::from(i) / 100.0;
        text.push_str(&format!("{x},{},{}\n", x * x, 1.0 - x));
    }
    std::fs::write(&table, text).unwrap();
    let out = dir.path().join("approx.csv");
    let spec = format!("table:{}", table.display());
    let o = algsig(&["approx", "--function", &spec, "--n", "50", "--grid", "11", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv_rows(&std::fs::read(&out).unwrap());
    assert_eq!(h, ["x", "f1", "f2", "a1", "a2", "error", "denominator"]);
    assert_eq!(rows.len(), 11);
}

#[test]
fn exit_codes_for_bad_input() {
    let missing = Path::new("/nonexistent/dir/out.csv");
    assert_eq!(code(&algsig(&["approx", "--output", missing.to_str().unwrap()])), 4);
    assert_eq!(code(&algsig(&["approx", "--config", "/nonexistent/run.json"])), 4);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": [10], \"colour\": 1}").unwrap();
    assert_eq!(code(&algsig(&["approx", "--config", bad.to_str().unwrap()])), 5);
    assert_eq!(code(&algsig(&["approx", "--function", "nosuch"])), 5);
    assert_eq!(code(&algsig(&["certify", "--theorem", "T99"])), 5);
    assert_eq!(code(&algsig(&["frobnicate"])), 5);
    assert_eq!(code(&algsig(&["--help"])), 0);
}
