//! End-to-end tests of the `dhm` binary: exit codes, diagnostics, and the
//! stability of generated report files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dhm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dhm"))
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn met_prints_seconds_and_minutes() {
    let out = dhm()
        .args(["met", "--fmvc", "0.3047", "--resistance", "0.7562"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let seconds: f64 = text
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        (seconds - 176.94).abs() / 176.94 < 1e-3,
        "published value within 0.1%: {text}"
    );
    assert!(text.contains("min"));
}

#[test]
fn met_at_full_load_is_zero() {
    let out = dhm()
        .args(["met", "--fmvc", "1", "--resistance", "0.7562"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("MET: 0.00 s"));
}

#[test]
fn met_uses_registry_resistance_by_group() {
    let direct = dhm()
        .args(["met", "--fmvc", "0.3047", "--resistance", "0.7562"])
        .output()
        .unwrap();
    let named = dhm()
        .args(["met", "--fmvc", "0.3047", "--joint", "shoulder"])
        .output()
        .unwrap();
    assert_eq!(stdout(&direct), stdout(&named));
}

#[test]
fn met_rejects_out_of_range_load() {
    let out = dhm()
        .args(["met", "--fmvc", "1.2", "--resistance", "0.7562"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("fmvc"));
}

#[test]
fn chain_dump_resolves_table_symbols() {
    let out = dhm()
        .args(["chain-dump", "--stature", "1.75"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    // r = -W_s/2 at 1.75 m stature
    assert!(text.contains("-0.1785"), "{text}");
    // d = -D_ll on the ankle rows
    assert!(text.contains("-0.4305"), "{text}");
    assert!(text.lines().any(|l| l.contains("flexion")));
    // 28 joint rows + two header lines
    assert_eq!(text.lines().count(), 30);
}

#[test]
fn chain_dump_rejects_nonpositive_stature() {
    let out = dhm()
        .args(["chain-dump", "--stature", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn strength_query_evaluates_profile() {
    let out = dhm()
        .args([
            "strength",
            "--joint",
            "elbow",
            "--shoulder-flexion",
            "30",
            "--elbow-flexion",
            "90",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("75.900 N*m"), "{}", stdout(&out));

    let out = dhm()
        .args([
            "strength",
            "--joint",
            "elbow",
            "--shoulder-flexion",
            "30",
            "--elbow-flexion",
            "170",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("elbow-flexion"));
}

#[test]
fn evaluate_writes_reports_matching_published_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dhm()
        .arg("evaluate")
        .arg(repo_root().join("scenarios/drilling.toml"))
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    // normalized shoulder strength every 30 s within 0.5 pp
    let ts = std::fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    let expected = [100.0, 82.2, 67.2, 54.9, 44.8, 36.6, 30.1];
    let shoulder_rows: Vec<f64> = ts
        .lines()
        .skip(1)
        .filter(|l| l.contains(",shoulder,"))
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap() * 100.0)
        .collect();
    assert_eq!(shoulder_rows.len(), expected.len());
    for (got, expect) in shoulder_rows.iter().zip(expected) {
        assert!((got - expect).abs() < 0.5, "{got} vs {expect}");
    }

    // endurance grid center within 2% of the published 176.94 s
    let met = std::fs::read_to_string(dir.path().join("met_grid_shoulder.csv")).unwrap();
    let center: f64 = met
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    assert!((center - 176.94).abs() / 176.94 < 0.02, "center = {center}");

    // reduction grid keeps the published dash pattern columns
    let red = std::fs::read_to_string(dir.path().join("reduction_grid_shoulder.csv")).unwrap();
    let first_row = red.lines().nth(1).unwrap();
    assert!(first_row.starts_with("m,-,-,"), "{first_row}");

    assert!(dir.path().join("report.toml").exists());
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn evaluate_outputs_are_deterministic() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = dhm()
            .arg("evaluate")
            .arg(repo_root().join("scenarios/drilling.toml"))
            .arg("--out-dir")
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    for name in [
        "report.toml",
        "timeseries.csv",
        "met_grid_shoulder.csv",
        "reduction_grid_elbow.csv",
        "summary.txt",
    ] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn evaluate_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = std::fs::read_to_string(repo_root().join("scenarios/drilling.toml")).unwrap();
    let broken = scenario.replace("[world]", "turbo_mode = true\n\n[world]");
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, broken).unwrap();
    let out = dhm().arg("evaluate").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("turbo_mode"), "{}", stderr(&out));
}

#[test]
fn evaluate_flags_subject_overload_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = std::fs::read_to_string(repo_root().join("scenarios/drilling.toml")).unwrap();
    let heavy = scenario.replace("-49.05", "-4905.0");
    let path = dir.path().join("heavy.toml");
    std::fs::write(&path, heavy).unwrap();
    let out = dhm()
        .arg("evaluate")
        .arg(&path)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // the report is still written, with the overload marked
    let summary =
        std::fs::read_to_string(dir.path().join("out").join("summary.txt")).unwrap();
    assert!(summary.contains("immediate overload"), "{summary}");
}

#[test]
fn evaluate_many_scenarios_in_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let out = dhm()
        .arg("evaluate")
        .arg(repo_root().join("scenarios/drilling.toml"))
        .arg(repo_root().join("scenarios/drilling_with_feed.toml"))
        .arg("--jobs")
        .arg("2")
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.contains("evaluated")).count(), 2);
    // each scenario lands in its own subdirectory of the shared out-dir
    assert!(dir.path().join("drilling/report.toml").exists());
    assert!(dir.path().join("drilling_with_feed/report.toml").exists());

    // the feed-force variant loads the shoulder harder
    let read_f = |p: &Path| -> f64 {
        let text = std::fs::read_to_string(p).unwrap();
        text.lines()
            .find(|l| l.contains("relative load"))
            .unwrap()
            .split_whitespace()
            .last()
            .unwrap()
            .parse()
            .unwrap()
    };
    let base = read_f(&dir.path().join("drilling/summary.txt"));
    let feed = read_f(&dir.path().join("drilling_with_feed/summary.txt"));
    assert!(feed > base, "feed {feed} vs base {base}");
}

#[test]
fn regress_reports_models_and_group_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("models.toml");
    std::fs::write(
        &path,
        r#"
schema_version = 1

[[models]]
name = "identity"
expression = "-ln(x)/x"

[[models]]
name = "triple"
expression = "3 * (-ln(x)/x)"
"#,
    )
    .unwrap();

    let out = dhm().arg("regress").arg(&path).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("identity: m = 1.000000"), "{text}");
    assert!(text.contains("triple: m = 3.000000"), "{text}");
    assert!(
        text.contains("mean m = 2.000000") && text.contains("sigma_m = 1.000000"),
        "{text}"
    );

    let sampled = dhm()
        .arg("regress")
        .arg(&path)
        .arg("--sample-std")
        .output()
        .unwrap();
    assert!(stdout(&sampled).contains("sigma_m = 1.414214"), "{}", stdout(&sampled));
}

#[test]
fn regress_rejects_malformed_expressions_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        r#"
schema_version = 1

[[models]]
name = "broken"
expression = "1 + * x"
"#,
    )
    .unwrap();
    let out = dhm().arg("regress").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("position"), "{}", stderr(&out));
}

#[test]
fn data_dir_override_is_honored() {
    // an override directory with a broken chain file must fail loudly
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("chain.toml"), "schema_version = 1\n").unwrap();
    let out = dhm()
        .args(["chain-dump", "--stature", "1.75", "--data-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("chain.toml"), "{}", stderr(&out));

    // same override through the environment variable
    let out = dhm()
        .args(["chain-dump", "--stature", "1.75"])
        .env("DHM_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluate_exits_zero_when_only_grid_cells_overload() {
    // heavier machine: the scenario subject holds the load, the weakest
    // percentile column does not; that is a normal report
    let dir = tempfile::tempdir().unwrap();
    let scenario = std::fs::read_to_string(repo_root().join("scenarios/drilling.toml")).unwrap();
    let heavier = scenario.replace("-49.05", "-156.0");
    let path = dir.path().join("heavier.toml");
    std::fs::write(&path, heavier).unwrap();
    let out = dhm()
        .arg("evaluate")
        .arg(&path)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let met = std::fs::read_to_string(dir.path().join("out/met_grid_shoulder.csv")).unwrap();
    assert!(met.contains("overload"), "{met}");
}
