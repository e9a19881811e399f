//! Drives the installed binary the way a user would: real processes,
//! real config files, real output directories.

use std::path::Path;
use std::process::{Command, Output};

fn homlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_homlab"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary should launch");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_err(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary should launch");
    assert!(
        !out.status.success(),
        "expected failure\nstdout: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    out
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

const SMALL_CLASSICAL: &str = "\
kind = classical-dip
samples = 24

[delays]
list_s = -2e-3, 0, 2e-3

[phase]
dist = discrete
values_rad = 0, pi/2, pi, 3pi/2

[bootstrap]
n_resamples = 200
";

#[test]
fn mzi_scan_runs_without_a_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(homlab().args(["mzi-scan", "--out"]).arg(dir.path()));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("100 phases"), "{stdout}");
    let csv = read(&dir.path().join("mzi_scan.csv"));
    assert!(csv.starts_with("theta_rad,coincidence\n"), "{csv}");
    assert_eq!(csv.lines().count(), 101);
}

#[test]
fn complementarity_without_config_reports_both_ratios() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(homlab().args(["complementarity", "--out"]).arg(dir.path()));
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("complementarity.json"))).unwrap();
    let classical = report["classical"]["ratio"].as_f64().unwrap();
    let quantum = report["quantum"]["ratio"].as_f64().unwrap();
    assert!((classical - 0.5).abs() < 1e-9, "classical {classical}");
    assert!((quantum - 0.25).abs() < 1e-12, "quantum {quantum}");
    assert_eq!(report["seed"], 0);
}

#[test]
fn complementarity_config_selects_one_case() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("quantum.cfg");
    std::fs::write(&cfg, "kind = complementarity-quantum\n").unwrap();
    run_ok(
        homlab()
            .args(["complementarity", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path()),
    );
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("complementarity.json"))).unwrap();
    assert_eq!(report["kind"], "complementarity-quantum");
    assert!((report["ratio"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn classical_dip_reruns_byte_identical_and_seeds_differ() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dip.cfg");
    std::fs::write(&cfg, SMALL_CLASSICAL).unwrap();
    for name in ["a", "b"] {
        run_ok(
            homlab()
                .args(["classical-dip", "--seed", "42", "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(dir.path().join(name)),
        );
    }
    let a = read(&dir.path().join("a/dip_curve.csv"));
    let b = read(&dir.path().join("b/dip_curve.csv"));
    assert_eq!(a, b, "same seed must reproduce the same bytes");

    run_ok(
        homlab()
            .args(["classical-dip", "--seed", "43", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join("c")),
    );
    let c = read(&dir.path().join("c/dip_curve.csv"));
    assert_ne!(a, c, "a different seed must move the sampled points");
}

#[test]
fn thread_cap_does_not_change_the_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dip.cfg");
    std::fs::write(&cfg, SMALL_CLASSICAL).unwrap();
    for (name, threads) in [("one", "1"), ("three", "3")] {
        run_ok(
            homlab()
                .env("HOMLAB_THREADS", threads)
                .args(["classical-dip", "--seed", "5", "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(dir.path().join(name)),
        );
    }
    assert_eq!(
        read(&dir.path().join("one/dip_curve.csv")),
        read(&dir.path().join("three/dip_curve.csv"))
    );
}

#[test]
fn seed_flag_overrides_the_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dip.cfg");
    std::fs::write(&cfg, format!("seed = 11\n{SMALL_CLASSICAL}")).unwrap();
    run_ok(
        homlab()
            .args(["classical-dip", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join("cfgseed")),
    );
    let summary = read(&dir.path().join("cfgseed/summary.json"));
    assert!(summary.contains("\"seed\": 11"), "{summary}");
    run_ok(
        homlab()
            .args(["classical-dip", "--seed", "12", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join("flagseed")),
    );
    let summary = read(&dir.path().join("flagseed/summary.json"));
    assert!(summary.contains("\"seed\": 12"), "{summary}");
}

#[test]
fn samples_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dip.cfg");
    std::fs::write(&cfg, SMALL_CLASSICAL).unwrap();
    run_ok(
        homlab()
            .args(["classical-dip", "--samples", "8", "--seed", "1", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join("o")),
    );
    let summary = read(&dir.path().join("o/summary.json"));
    assert!(summary.contains("\"samples_per_delay\": [\n    8,"), "{summary}");

    let out = run_err(
        homlab()
            .args(["classical-dip", "--samples", "lots", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join("bad")),
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("samples"), "{stderr}");
}

#[test]
fn config_kind_must_match_the_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.cfg");
    std::fs::write(&cfg, "kind = mzi-scan\n").unwrap();
    let out = run_err(
        homlab()
            .args(["classical-dip", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path()),
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("does not match"), "{stderr}");
}

#[test]
fn fit_and_bootstrap_require_a_config() {
    for sub in ["fit", "min-n", "bootstrap"] {
        let out = run_err(homlab().arg(sub));
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(stderr.contains("config"), "{sub}: {stderr}");
    }
}

#[test]
fn rf_chain_flag_exists_only_on_the_classical_dip() {
    run_err(homlab().args(["quantum-dip", "--rf-chain"]));
    run_err(homlab().args(["classical-dip", "--frobnicate"]));
}

#[test]
fn min_n_and_bootstrap_run_from_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("minn.cfg");
    std::fs::write(&cfg, "kind = min-n\n\n[min_n]\nmean = 2.0\nstd_dev = 0.2\n").unwrap();
    run_ok(
        homlab()
            .args(["min-n", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join("n")),
    );
    let report = read(&dir.path().join("n/min_n.json"));
    assert!(report.contains("\"min_samples\": 16"), "{report}");

    let values = dir.path().join("values.csv");
    std::fs::write(&values, "value\n1.0\n2.0\n3.0\n4.0\n").unwrap();
    let cfg = dir.path().join("boot.cfg");
    std::fs::write(
        &cfg,
        format!(
            "kind = bootstrap\n\n[bootstrap]\ndata_csv = {}\nn_resamples = 500\n",
            values.display()
        ),
    )
    .unwrap();
    run_ok(
        homlab()
            .args(["bootstrap", "--seed", "3", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join("b")),
    );
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("b/bootstrap.json"))).unwrap();
    assert_eq!(report["count"], 4);
    assert_eq!(report["mean"], 2.5);
    let lo = report["ci_lo"].as_f64().unwrap();
    let hi = report["ci_hi"].as_f64().unwrap();
    assert!(lo <= 2.5 && 2.5 <= hi, "[{lo}, {hi}]");
}

#[test]
fn fit_runs_from_a_config_and_a_curve() {
    let dir = tempfile::tempdir().unwrap();
    // classical dip points on the closed form with visibility 1/2
    let sigma = 1e-3_f64;
    let mut csv = String::from("tau_s,c_mean,ci_lo,ci_hi\n");
    for k in -5..=5 {
        let tau = k as f64 * 8e-4;
        let c = 1.0 - 0.5 * (-tau * tau / (2.0 * sigma * sigma)).exp();
        csv.push_str(&format!("{tau},{c},{c},{c}\n"));
    }
    let data = dir.path().join("curve.csv");
    std::fs::write(&data, csv).unwrap();
    let cfg = dir.path().join("fit.cfg");
    std::fs::write(
        &cfg,
        format!(
            "kind = fit\n\n[fit]\nmodel = classical\ndata_csv = {}\n\n\
             [phase]\ndist = discrete\nvalues_rad = 0, pi/2, pi, 3pi/2\n",
            data.display()
        ),
    )
    .unwrap();
    run_ok(
        homlab()
            .args(["fit", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join("f")),
    );
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("f/fit_report.json"))).unwrap();
    assert_eq!(report["model"], "classical");
    assert_eq!(report["result"]["converged"], true);
    let vis = report["visibility"].as_f64().unwrap();
    assert!((vis - 0.5).abs() < 1e-6, "visibility {vis}");
    let sig = report["result"]["params"]["envelope_sigma"]["value"]
        .as_f64()
        .unwrap();
    assert!((sig - sigma).abs() / sigma < 1e-6, "sigma {sig}");
}
