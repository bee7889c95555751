use std::process::{Command, Output};

fn eitat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eitat")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {report}"))
}

#[test]
fn params_lambda_rates_and_threshold() {
    let o = eitat(&["params", "--system", "lambda"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(&text, "gamma13"), "1.9");
    assert_eq!(value(&text, "threshold"), "1.899");
    assert_eq!(value(&text, "probe_transition"), "1-3");
}

#[test]
fn params_vee_json() {
    let o = eitat(&["params", "--system", "vee", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["threshold"].as_f64().unwrap(), 0.9);
}

#[test]
fn unknown_system_is_a_usage_error() {
    let o = eitat(&["params", "--system", "ladder"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn forbidden_channel_is_a_usage_error() {
    let o = eitat(&["params", "--system", "lambda", "--decay", "21=1,12=1"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn threshold_spectrum_reports_degeneracy() {
    let o = eitat(&["spectrum", "--system", "cascade-at", "--threshold-factor", "1"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("1.001"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn spectrum_csv_shape() {
    let o = eitat(&["spectrum", "--system", "lambda", "--omega-c", "4", "--grid", "-2:2:5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta_p,re_r1,im_r1,re_r2,im_r2,re_total,im_total,absorption");
    assert_eq!(lines.len(), 6);
    assert!(lines[3].starts_with("0.0,"));
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), 8);
    }
}

#[test]
fn poles_match_strong_field_lambda() {
    let o = eitat(&["poles", "--system", "lambda", "--omega-c", "4"]);
    let text = stdout(&o);
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((row[1] - 1.760241389696311).abs() < 1e-12);
    assert!((row[2] + 0.9505).abs() < 1e-12);
}

#[test]
fn verify_fails_at_zero_tolerance() {
    let ok = eitat(&["verify", "--system", "lambda", "--threshold-factor", "0.5"]);
    assert!(ok.status.success());
    let bad = eitat(&["verify", "--system", "lambda", "--threshold-factor", "0.5", "--tol", "0"]);
    assert_eq!(bad.status.code(), Some(4));
    assert_eq!(value(&stdout(&bad), "verdict"), "FAIL");
}

#[test]
fn empty_ratio_range_prints_header_only() {
    let o = eitat(&["ratio-scan", "--system", "vee", "--factors", "0.1:10:0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "factor,ratio,dominance\n");
}

#[test]
fn ratio_scan_skips_threshold() {
    let o = eitat(&["ratio-scan", "--system", "lambda", "--factors", "0.5:1.5:3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipped"));
}

#[test]
fn classify_reports_phenomenon() {
    let o = eitat(&["classify", "--system", "vee", "--threshold-factor", "0.1"]);
    let text = stdout(&o);
    assert_eq!(value(&text, "phenomenon"), "SingleResonance");
    assert_eq!(value(&text, "dip"), "false");
    let o = eitat(&["classify", "--system", "lambda", "--threshold-factor", "0.5"]);
    let text = stdout(&o);
    assert_eq!(value(&text, "phenomenon"), "EIT");
    assert_eq!(value(&text, "dip"), "true");
}

#[test]
fn evolution_rejects_ascending_factors() {
    let o = eitat(&["evolution", "--system", "lambda", "--factors", "0.1,0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn evolution_json_has_one_frame_per_factor() {
    let o = eitat(&["evolution", "--system", "cascade-eit", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let frames = v["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 4);
    assert!(frames.iter().all(|f| f["rows"].as_array().unwrap().len() == 2001));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "system = \"cascade-at\"\nthreshold-factor = 2.0\ngrid = \"-1:1:3\"\n").unwrap();
    let p = path.to_str().unwrap();
    let from_file = eitat(&["--config", p, "spectrum"]);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(stdout(&from_file).lines().count(), 4);
    let flag = eitat(&["--config", p, "spectrum", "--grid", "-1:1:5"]);
    assert_eq!(stdout(&flag).lines().count(), 6);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "sytem = \"vee\"\n").unwrap();
    let o = eitat(&["--config", path.to_str().unwrap(), "params"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let args = ["spectrum", "--system", "vee", "--omega-c", "0.3", "--format", "json"];
    let direct = eitat(&args);
    let mut with_file = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    let o = eitat(&with_file);
    assert!(o.status.success() && o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}
