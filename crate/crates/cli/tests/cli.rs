use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spintomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spintomo")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = spintomo(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn csv_column(path: &Path, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn list_presets_names_every_case() {
    let text = ok(&["list-presets"]);
    for label in ["i ", "ii ", "iii", "A ", "B ", "C ", "D "] {
        assert!(text.contains(&format!("case {label}")), "{label} missing from\n{text}");
    }
    assert!(text.contains("868"));
}

#[test]
fn invalid_case_lists_valid_cases() {
    let dir = tempfile::tempdir().unwrap();
    let out = spintomo(&["--out", dir.path().to_str().unwrap(), "experiment", "--case", "E"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("i, ii, iii, A, B, C, D"), "{err}");
}

#[test]
fn experiment_one_time_series() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["--out", d.to_str().unwrap(), "experiment", "I", "--snapshot", "0.39269908169872414"]);
    let text = fs::read_to_string(d.join("timeseries.csv")).unwrap();
    assert_eq!(text.lines().count(), 66);
    assert_eq!(
        text.lines().next().unwrap(),
        "t,xi_tei,xi_tei_reduced,xi_ipr,xi_pcc,xi_bd,xi_qmi,discord,negativity,extent1,extent2"
    );
    let row0: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row0[0], "0");
    assert_eq!(row0[1], "0.111111111111");
    assert_eq!(row0[6], "1");
    assert_eq!(row0[8], "0");
    let manifest = json(&d.join("manifest.json"));
    assert_eq!(manifest["command"], "experiment");
    assert!(manifest["outputs"].as_array().unwrap().iter().any(|o| o == "tomogram_016.json"));

    // the snapshot is the pi/8 state
    let report_dir = d.join("report");
    let stdout = ok(&[
        "--out",
        report_dir.to_str().unwrap(),
        "analyze-tomogram",
        d.join("tomogram_016.json").to_str().unwrap(),
    ]);
    assert!(stdout.contains("xi_tei = 0.333333333333"), "{stdout}");
    let report = json(&report_dir.join("report.json"));
    assert_eq!(report["complete"], true);
    assert!((report["indicators"]["full"]["xi_tei"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn experiment_two_case_i_discord_is_tiny() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["--out", dir.path().to_str().unwrap(), "experiment", "--case", "i"]);
    let discord = csv_column(&dir.path().join("timeseries.csv"), "discord");
    assert_eq!(discord.len(), 101);
    assert!(discord.iter().all(|d| d.abs() <= 1e-7), "{discord:?}");
    let extent2 = csv_column(&dir.path().join("timeseries.csv"), "extent2");
    assert!(extent2.iter().all(|e| e.is_finite()));
}

#[test]
fn identical_seeds_give_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        ok(&["--seed", "17", "--out", d.path().to_str().unwrap(), "experiment", "--case", "D", "--snapshot", "0.005"]);
    }
    for name in ["timeseries.csv", "records.json", "tomogram_050.json", "snapshots.json"] {
        let read = |d: &tempfile::TempDir| fs::read_to_string(d.path().join(name)).unwrap();
        assert_eq!(read(&a), read(&b), "{name}");
    }
}

#[test]
fn manifest_config_replays_the_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&["--seed", "5", "--out", a.path().to_str().unwrap(), "circuit", "--theta", "0.7", "--shots", "1000"]);
    let cfg = a.path().join("config.json");
    ok(&["--config", cfg.to_str().unwrap(), "--out", b.path().to_str().unwrap(), "circuit"]);
    assert_eq!(fs::read(a.path().join("summary.json")).unwrap(), fs::read(b.path().join("summary.json")).unwrap());
    assert_eq!(fs::read(a.path().join("tomogram_rep3.json")).unwrap(), fs::read(b.path().join("tomogram_rep3.json")).unwrap());
}

#[test]
fn circuit_shot_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&["--out", d, "circuit", "--theta", "1.5707963267948966"]);
    let s = json(&dir.path().join("summary.json"));
    let mean = s["mean"].as_f64().unwrap();
    assert!((0.31..=0.36).contains(&mean), "{mean}");
    assert!(s["std"].as_f64().unwrap() > 0.0);
    assert_eq!(s["xi_tei"].as_array().unwrap().len(), 6);
    assert!(dir.path().join("tomogram_rep5.json").exists());

    ok(&["--out", d, "circuit", "--theta", "0"]);
    let mean = json(&dir.path().join("summary.json"))["mean"].as_f64().unwrap();
    assert!((0.10..=0.13).contains(&mean), "{mean}");

    let out = ok(&["--out", d, "--exact", "circuit", "--initial", "compact"]);
    assert!(out.contains("xi_tei = 0.111111111111"), "{out}");
    let out = ok(&["--out", d, "--exact", "circuit", "--theta", "1.5707963267948966"]);
    assert!(out.contains("xi_tei = 0.333333333333"), "{out}");
}

#[test]
fn partial_and_corrupted_tomograms() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["--out", d.to_str().unwrap(), "--exact", "circuit", "--theta", "1.5707963267948966"]);
    let full = json(&d.join("tomogram_exact.json"));

    let mut six = full.clone();
    six["slices"] = serde_json::Value::Array(
        full["slices"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|s| !s["axes"].as_str().unwrap().starts_with('z'))
            .cloned()
            .collect(),
    );
    fs::write(d.join("six.json"), six.to_string()).unwrap();
    let out_dir = d.join("six");
    let stdout = ok(&["--out", out_dir.to_str().unwrap(), "analyze-tomogram", d.join("six.json").to_str().unwrap()]);
    assert!(stdout.contains("xi_tei_reduced = 0.333333333333"), "{stdout}");
    let report = json(&out_dir.join("report.json"));
    assert!(report["indicators"]["full"].is_null());
    assert_eq!(report["missing_slices"], serde_json::json!(["zx", "zy", "zz"]));
    assert!(report["unavailable"].as_array().unwrap().iter().any(|u| u.as_str().unwrap().starts_with("full average")));

    let missing = spintomo(&["--out", out_dir.to_str().unwrap(), "analyze-tomogram", d.join("six.json").to_str().unwrap(), "--reduced", "xx,zz"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("zz"));

    let mut bad = full.clone();
    let p = &mut bad["slices"][4]["probs"][0];
    *p = serde_json::json!(p.as_f64().unwrap() + 0.01);
    fs::write(d.join("bad.json"), bad.to_string()).unwrap();
    let out = spintomo(&["--out", out_dir.to_str().unwrap(), "analyze-tomogram", d.join("bad.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("slice yy"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_errors_and_cross_check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("typo.json"), r#"{"sede": 3}"#).unwrap();
    let out = spintomo(&["--config", d.join("typo.json").to_str().unwrap(), "list-presets"]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(
        d.join("strict.json"),
        r#"{"experiment_i": {"chi_t_grid": [0.1, 0.2], "analysis": {"evolution_tol": 0.0, "compute_discord": false}}}"#,
    )
    .unwrap();
    let out = spintomo(&["--config", d.join("strict.json").to_str().unwrap(), "--out", d.to_str().unwrap(), "experiment"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("closed form"));
}
