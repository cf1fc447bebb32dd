use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_billiard-lab"))
        .args(args)
        .env_remove("BILLIARD_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

#[test]
fn commute_test_on_the_shipped_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["commute-test", "--config", &config("euclidean_confocal.json"), "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("commute.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1001);
    assert!(csv.starts_with("sample_index,defect_raw,defect_normalized,rejected_reason\n"));
    assert!(!csv.contains('\r'));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("commute.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["config"]["schema"], 1);
    assert_eq!(summary["report"]["accepted"], 1000);
}

#[test]
fn swapped_members_exit_with_a_nesting_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "commute-test",
        "--config",
        &config("euclidean_bad_nesting.json"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not nested"));
    assert!(!dir.path().join("commute.csv").exists());
}

#[test]
fn unknown_flags_and_subcommands_are_rejected() {
    assert_eq!(run(&["bounce"]).status.code(), Some(2));
    let o = run(&["commute-test", "--config", &config("euclidean_confocal.json"), "--speed", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unmet_bound_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("euclidean_confocal.json")).unwrap();
    let strict = text.replace("\"samples\": 1000", "\"samples\": 50, \"thresholds\": { \"max_raw\": 1e-30 }");
    let path = dir.path().join("strict.json");
    std::fs::write(&path, strict).unwrap();
    let o = run(&["commute-test", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("max raw defect"));
}

#[test]
fn perturb_scan_writes_one_csv_per_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("euclidean_scan.json")).unwrap();
    let small = text
        .replace("\"samples\": 1000", "\"samples\": 100")
        .replace("\"modes\": [\"axis_bump\", \"cubic_bump\"]", "\"modes\": [\"axis_bump\"]");
    let path = dir.path().join("scan.json.in");
    std::fs::write(&path, small).unwrap();
    let o = run(&["perturb-scan", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for eps in ["1e-3", "1e-2", "1e-1"] {
        assert!(dir.path().join(format!("scan_axis_bump_{eps}.csv")).exists());
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("scan.json")).unwrap()).unwrap();
    assert_eq!(summary["curves"][0]["rows"].as_array().unwrap().len(), 3);
    assert_eq!(summary["curves"][0]["monotone"], true);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config("euclidean_confocal.json");
    for (dir, workers) in [(&a, "1"), (&b, "8")] {
        let o = run(&["caustic-test", "--config", &cfg, "--out", dir.path().to_str().unwrap(), "--workers", workers, "--no-timing", "--seed", "5"]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["caustic.csv", "caustic.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let summary = std::fs::read_to_string(a.path().join("caustic.json")).unwrap();
    assert!(!summary.contains("wall_clock") && !summary.contains("generated_unix"));
    assert!(summary.contains("\"seed\": 5"));
}

#[test]
fn output_directory_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_billiard-lab"))
        .args(["germ-test", "--config", &config("euclidean_germ.json")])
        .env("BILLIARD_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("germ.csv").exists());
}

#[test]
fn pencil_info_reports_eigenvalues_and_probe_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("euclidean_confocal.json")).unwrap();
    let probe = text.replace("\"samples\": 1000", "\"samples\": 1, \"probe\": [1.0, 1.7320508075688772, 0.0, 0.0]");
    let path = dir.path().join("probe.json");
    std::fs::write(&path, probe).unwrap();
    let o = run(&["pencil-info", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    let line = text.lines().find(|l| l.starts_with("global eigenvalues λ")).unwrap();
    assert!(line.contains("1.0") && line.contains("2.0") && line.contains("3.0"), "{line}");
    let mu = text.lines().find(|l| l.starts_with("members through probe, μ")).unwrap();
    let values: Vec<f64> = mu
        .split(['[', ']'])
        .nth(1)
        .unwrap()
        .split(',')
        .map(|s| s.trim().parse().unwrap())
        .collect();
    assert!(values.iter().any(|v| v.abs() < 1e-9), "{mu}");

    let o = run(&["pencil-info", "--config", &config("spherical_discovered.json")]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("convex members for λ in"));
}
