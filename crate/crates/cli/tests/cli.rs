use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use phoenix_core::experiment::{run_pipeline, Algo};
use phoenix_core::io::config::load_config;
use phoenix_core::io::results::load_json;
use phoenix_core::io::topology::load_topology;
use phoenix_core::metrics::EvalReport;

fn phoenix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phoenix")).args(args).env_remove("PHOENIX_OUT").output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = phoenix(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, name: &str, seed: &str) -> std::path::PathBuf {
    let out = dir.join(name);
    ok(&["simulate", "--motes", "8", "--extent", "80", "--duration-days", "10", "--seed", seed, "--out", s(&out)]);
    out
}

#[test]
fn exit_codes() {
    assert_eq!(phoenix(&["--help"]).status.code(), Some(0));
    assert_eq!(phoenix(&["simulate", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(phoenix(&["sweep", "--scenario", "bogus"]).status.code(), Some(1));
    assert_eq!(phoenix(&["simulate", "--numseg", "0", "--out", "/tmp/never-written"]).status.code(), Some(1));
    let missing = phoenix(&["reconstruct", "--anchors", "/nonexistent/a.csv", "--samples", "/nonexistent/s.csv"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/a.csv"));
}

#[test]
fn help_lists_defaults() {
    let help = String::from_utf8(ok(&["simulate", "--help"]).stdout).unwrap();
    for needle in ["[default: 30]", "[default: 21600]", "[default: 40,70]", "[default: 0.2]", "[default: 5,15]", "[default: 4]"] {
        assert!(help.contains(needle), "missing {needle}");
    }
    let sweep = String::from_utf8(ok(&["sweep", "--help"]).stdout).unwrap();
    assert!(sweep.contains("--jobs") && sweep.contains("--seed-base") && sweep.contains("--paper-scale"));
}

#[test]
fn output_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_phoenix"))
        .args(["gen-topology", "--n", "5"])
        .env("PHOENIX_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("gen-topology/topology.csv").exists());
    assert!(dir.path().join("gen-topology/manifest.json").exists());
}

/// simulate, reconstruct and evaluate through files give the same numbers
/// as one in-process run.
#[test]
fn file_pipeline_matches_in_process_run() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), "sim", "11");
    let rec = dir.path().join("rec");
    let ev = dir.path().join("ev");
    ok(&["reconstruct", "--anchors", s(&sim.join("anchors.csv")), "--samples", s(&sim.join("samples.csv")), "--out", s(&rec)]);
    ok(&["evaluate", "--reconstruction", s(&rec), "--truth", s(&sim), "--out", s(&ev)]);
    for d in [&sim, &rec, &ev] {
        assert!(d.join("manifest.json").exists());
    }

    let cfg = load_config(&sim.join("config.txt")).unwrap();
    let topo = load_topology(&sim.join("topology.csv")).unwrap();
    let want = run_pipeline(&cfg, &topo, Algo::Phoenix).unwrap().report;
    let got: EvalReport = load_json(&ev.join("report.json")).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
    assert_eq!((got.lost, got.total), (want.lost, want.total));
    assert!(close(got.data_loss_pct, want.data_loss_pct));
    assert!(close(got.ppm.mean, want.ppm.mean) && close(got.ppm.p99, want.ppm.p99) && close(got.ppm.max, want.ppm.max));
    assert!(close(got.alpha_err_ppm.median, want.alpha_err_ppm.median));
    assert!(close(got.beta_err_s.median, want.beta_err_s.median));
    assert_eq!(got.ppm_errors.len(), want.ppm_errors.len());
    assert!(got.ppm_errors.iter().zip(&want.ppm_errors).all(|(a, b)| close(*a, *b)));

    // The truth column in the sample file is never consulted.
    let rec2 = dir.path().join("rec2");
    ok(&["reconstruct", "--anchors", s(&sim.join("anchors.csv")), "--samples", s(&sim.join("samples_truth.csv")), "--out", s(&rec2)]);
    for f in ["fits.csv", "timestamps.csv", "diagnostics.json"] {
        assert_eq!(fs::read(rec.join(f)).unwrap(), fs::read(rec2.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn sweeps_are_deterministic_and_thread_count_free() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        ok(&[
            "sweep", "--scenario", "numseg", "--values", "1,4", "--reps", "2", "--motes", "6", "--duration-days", "8",
            "--seed-base", "5", "--jobs", jobs, "--out", s(&out),
        ]);
        fs::read(out.join("sweep.csv")).unwrap()
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "1"));
    assert_eq!(a, run("c", "2"));
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 4);
}

#[test]
fn rerun_reproduces_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let sim = simulate(dir.path(), "sim", "3");
    let again = dir.path().join("again");
    ok(&["rerun", "--manifest", s(&sim.join("manifest.json")), "--out", s(&again)]);
    let mut names: Vec<_> = fs::read_dir(&sim).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 8);
    for n in names {
        assert_eq!(fs::read(sim.join(&n)).unwrap(), fs::read(again.join(&n)).unwrap(), "{n:?}");
    }
}
