use std::path::Path;
use std::process::{Command, Output};

use dnnclass::harness::Config;

fn dnnclass(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dnnclass"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

/// A verify configuration small enough to finish in a few seconds.
fn quick_config(dir: &Path) -> String {
    let mut cfg = Config::default();
    cfg.verify.exactness_points = 2_000;
    cfg.verify.mc_samples = 20_000;
    cfg.verify.random_nets = 2;
    cfg.verify.compositions = 20;
    let path = dir.join("quick.toml");
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn schedule_writes_a_tagged_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dnnclass(
        &[
            "schedule",
            "--case",
            "smooth-boundary",
            "--alpha",
            "1",
            "--q",
            "1",
            "--d",
            "2",
            "--n",
            "1000,10000",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("schedule.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# schema: dnnclass.schedule v1"));
    assert!(lines.next().unwrap().starts_with("n,xi,"));
    assert_eq!(lines.count(), 2);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn schedule_accepts_infinite_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let out = dnnclass(
        &[
            "schedule", "--case", "margin", "--alpha", "1", "--q", "inf", "--gamma", "inf", "--d",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["schedule", "--no-such-flag"][..],
        &["verify", "--jobs", "0"],
        &["verify", "--config", "/nonexistent/dnnclass.toml"],
        &["rate-study", "--inject-fault", "horizon-gap"],
        &["verify", "--inject-fault", "not-a-fault"],
        &["schedule", "--alpha", "1"],
        &[
            "schedule",
            "--case",
            "smooth-boundary",
            "--alpha",
            "-1",
            "--q",
            "1",
            "--d",
            "2",
        ],
    ] {
        let out = dnnclass(args, dir.path());
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn malformed_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "seed = \"seven\"\n").unwrap();
    let out = dnnclass(
        &["schedule", "--config", path.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_clean_and_fails_with_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let config = quick_config(dir.path());
    let clean = dnnclass(&["verify", "--config", &config], dir.path());
    assert_eq!(
        clean.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&clean.stdout)
    );
    let report = std::fs::read_to_string(dir.path().join("verify.json")).unwrap();
    assert!(report.contains("\"passed\": true"));

    let faulty = dnnclass(
        &[
            "verify",
            "--config",
            &config,
            "--inject-fault",
            "horizon-gap",
        ],
        dir.path(),
    );
    assert_eq!(faulty.status.code(), Some(1));
    let report = std::fs::read_to_string(dir.path().join("verify.json")).unwrap();
    assert!(report.contains("\"passed\": false"));
}

#[test]
fn shipped_quick_config_runs_a_study() {
    let dir = tempfile::tempdir().unwrap();
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/quick.toml");
    let out = dnnclass(
        &[
            "rate-study",
            "--config",
            config,
            "--seed",
            "5",
            "--jobs",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let fit = std::fs::read_to_string(dir.path().join("rate_fit.csv")).unwrap();
    assert!(fit.starts_with("# schema: dnnclass.rate_fit v1\n"));
    let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 5"));
}
