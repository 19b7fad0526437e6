use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ris_steer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris-steer"))
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn error_line(o: &Output) -> String {
    let text = stderr(o);
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("error[")).collect();
    assert_eq!(lines.len(), 1, "stderr: {text}");
    lines[0].to_string()
}

fn preset_text(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../core/presets/{name}.toml"));
    fs::read_to_string(p).unwrap()
}

/// `area1_near` cut down to a 7x7 grid around the receiver.
fn small_scenario(dir: &Path) -> PathBuf {
    let text = preset_text("area1_near")
        .replace(
            "origin_m = [-1.1, -1.0, 1.1]",
            "origin_m = [0.1, -2.2, 1.1]",
        )
        .replace("count_u = 31", "count_u = 7")
        .replace("count_v = 31", "count_v = 7");
    let path = dir.join("small.toml");
    fs::write(&path, text).unwrap();
    path
}

fn out(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn target_sweep_writes_three_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = ris_steer(&[
        "--scenario",
        "area1_near",
        "--mode",
        "target-sweep",
        "--out",
        &out(dir.path(), "a"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let mut files: Vec<String> = fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(
        files,
        ["report.toml", "target_sweep.csv", "target_sweep.pgm"]
    );
    let report = fs::read_to_string(dir.path().join("a/report.toml")).unwrap();
    assert!(report.contains("peak_cell = [15, 15]"), "{report}");
}

#[test]
fn artifacts_do_not_depend_on_workers_or_repetition() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    let mut runs = Vec::new();
    for (k, workers) in ["1", "4", "1", "4"].iter().enumerate() {
        let o_dir = out(dir.path(), &format!("run{k}"));
        let o = ris_steer(&[
            "--scenario",
            scenario.to_str().unwrap(),
            "--mode",
            "target-sweep",
            "--workers",
            workers,
            "--out",
            &o_dir,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        runs.push(
            ["target_sweep.csv", "target_sweep.pgm", "report.toml"]
                .map(|f| fs::read(Path::new(&o_dir).join(f)).unwrap()),
        );
    }
    assert!(runs.iter().all(|r| *r == runs[0]));
}

#[test]
fn optimized_bitmap_drives_a_footprint() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = small_scenario(dir.path());
    let s = scenario.to_str().unwrap();
    let o = ris_steer(&[
        "--scenario",
        s,
        "--mode",
        "optimize-single",
        "--out",
        &out(dir.path(), "cfg"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bitmap = dir.path().join("cfg/config.bin");
    assert_eq!(fs::read(&bitmap).unwrap().len(), 1536 / 8);
    let cfg = fs::read_to_string(dir.path().join("cfg/config.toml")).unwrap();
    assert!(cfg.contains("hypothesis_rad") && cfg.contains("predicted_gain_db"));

    let o = ris_steer(&[
        "--scenario",
        s,
        "--mode",
        "rx-sweep",
        "--config",
        bitmap.to_str().unwrap(),
        "--pgm-range",
        "-80,-10",
        "--out",
        &out(dir.path(), "fp"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("fp/report.toml")).unwrap();
    assert!(report.contains("mode = \"rx-sweep\""));
    assert!(
        report.contains("pgm_range_dbm = [-80.0, -10.0]"),
        "{report}"
    );
    let pgm = fs::read(dir.path().join("fp/rx_sweep.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n7 7\n65535\n"));
}

#[test]
fn compare_reports_depth_broadening() {
    let dir = tempfile::tempdir().unwrap();
    let o = ris_steer(&[
        "--scenario",
        "area1_near",
        "--scenario2",
        "area1_far",
        "--mode",
        "compare-near-far",
        "--out",
        &out(dir.path(), "cmp"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("cmp/compare.toml")).unwrap();
    assert!(text.contains("depth_broadened = true"), "{text}");
    assert!(text.contains("depth_axis = \"v\""));
}

#[test]
fn seeded_brute_check_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| {
        let o = ris_steer(&[
            "--mode",
            "brute-check",
            "--seed",
            "7",
            "--out",
            &out(dir.path(), name),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read_to_string(dir.path().join(name).join("brute_check.toml")).unwrap()
    };
    let a = read("x");
    assert_eq!(a, read("y"));
    assert!(a.contains("exhaustive_dominates = true"), "{a}");
    assert!(a.contains("targets = 100"));
}

#[test]
fn rx_sweep_without_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = ris_steer(&[
        "--scenario",
        "area1_near",
        "--mode",
        "rx-sweep",
        "--out",
        &out(dir.path(), "o"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_line(&o).starts_with("error[usage] exit=2: rx-sweep: --config"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn brute_check_names_the_element_limit() {
    let dir = tempfile::tempdir().unwrap();
    let o = ris_steer(&[
        "--scenario",
        "area1_near",
        "--mode",
        "brute-check",
        "--out",
        &out(dir.path(), "o"),
    ]);
    assert_eq!(o.status.code(), Some(6));
    let line = error_line(&o);
    assert!(
        line.starts_with("error[optimizer] exit=6:")
            && line.contains("20")
            && line.contains("1536"),
        "{line}"
    );
}

#[test]
fn scenario_errors_carry_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(
        &path,
        preset_text("area1_near").replace("spacing_m = 0.1", "spacing_m = 0.0"),
    )
    .unwrap();
    let o = ris_steer(&[
        "--scenario",
        path.to_str().unwrap(),
        "--mode",
        "target-sweep",
        "--out",
        &out(dir.path(), "o"),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(error_line(&o).contains("key=grid.spacing_m"));

    fs::write(
        &path,
        preset_text("area1_near").replace("freq_hz = 5.375e9\n", ""),
    )
    .unwrap();
    let o = ris_steer(&[
        "--scenario",
        path.to_str().unwrap(),
        "--mode",
        "target-sweep",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(error_line(&o).contains("key=rf.freq_hz"));
}

#[test]
fn file_and_flag_errors() {
    let o = ris_steer(&[
        "--scenario",
        "/nonexistent/scene.toml",
        "--mode",
        "target-sweep",
    ]);
    assert_eq!(o.status.code(), Some(9));
    assert!(error_line(&o).starts_with("error[io] exit=9:"));

    let o = ris_steer(&[
        "--scenario",
        "area1_near",
        "--mode",
        "target-sweep",
        "--pgm-range",
        "5,1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    error_line(&o);

    let o = ris_steer(&["--scenario", "area1_near", "--mode", "compare-near-far"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_line(&o).contains("--scenario2"));

    let o = ris_steer(&["--mode", "target-sweep", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let o = ris_steer(&[
        "--scenario",
        "area1_near",
        "--mode",
        "rx-sweep",
        "--config",
        "/nonexistent/config.bin",
        "--out",
        &out(dir.path(), "o"),
    ]);
    assert_eq!(o.status.code(), Some(9));

    let short = dir.path().join("short.bin");
    fs::write(&short, [0u8; 3]).unwrap();
    let o = ris_steer(&[
        "--scenario",
        "area1_near",
        "--mode",
        "rx-sweep",
        "--config",
        short.to_str().unwrap(),
        "--out",
        &out(dir.path(), "o"),
    ]);
    assert_eq!(o.status.code(), Some(9));
    assert!(error_line(&o).contains("192"));
}

#[test]
fn help_documents_exit_codes() {
    let o = ris_steer(&["--help"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for flag in [
        "--scenario",
        "--mode",
        "--out",
        "--workers",
        "--config",
        "--scenario2",
        "--pgm-range",
        "--seed",
    ] {
        assert!(text.contains(flag), "{flag}");
    }
    for code in [
        "2  usage",
        "3  scenario",
        "4  geometry",
        "5  channel",
        "6  optimizer",
        "7  sweep",
        "8  metrics",
        "9  file",
    ] {
        assert!(text.contains(code), "{code}");
    }
}
