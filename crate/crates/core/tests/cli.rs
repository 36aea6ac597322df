use std::process::Command;

fn mmwave(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mmwave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn error_line(out: &std::process::Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(stderr.lines().last().expect("an error line")).expect("error line is JSON")
}

#[test]
fn pattern_prints_a_table() {
    let out = mmwave(&["pattern", "--points", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta_rad,gain_linear,gain_db");
    assert_eq!(lines.len(), 6);
}

#[test]
fn invalid_parameter_fails_with_a_json_line() {
    let out = mmwave(&["simulate", "--rho", "0.3", "--replications", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_line(&out);
    assert_eq!(e["error"], "config");
    assert!(e["message"].as_str().unwrap().contains("rho"));
}

#[test]
fn unknown_experiment_and_bad_usage_fail() {
    let out = mmwave(&["run", "fig9", "--out", std::env::temp_dir().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out)["error"].is_string());

    let out = mmwave(&["simulate", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["error"], "usage");
}

#[test]
fn bad_config_file_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "eta = 1.5\n").unwrap();
    let out = mmwave(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out)["message"].as_str().unwrap().contains("eta"));
}

#[test]
fn simulate_is_reproducible_across_workers() {
    let args = ["simulate", "--replications", "300", "--seed", "4", "--scenario", "random-typical"];
    let a = mmwave(&[&args[..], &["--workers", "1"]].concat());
    let b = mmwave(&[&args[..], &["--workers", "3"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
