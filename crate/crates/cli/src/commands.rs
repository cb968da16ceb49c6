use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;
use serde::Serialize;

use phoenix_core::experiment::{mean_by_param, reconstruct_with, run_sweep, write_rows, Algo, Scale, Scenario, SweepSpec};
use phoenix_core::io::config::{apply_settings, format_config, load_config, save_config};
use phoenix_core::io::results::{
    load_accounting, load_fits, load_timestamps, save_accounting, save_fits, save_json, save_report_csv,
    save_timestamps,
};
use phoenix_core::io::samples::{load_samples, save_samples, SampleRow};
use phoenix_core::io::topology::{load_topology, save_topology};
use phoenix_core::io::truth::{load_truth, save_truth};
use phoenix_core::io::anchors::{load_anchors, save_anchors};
use phoenix_core::metrics::evaluate;
use phoenix_core::recon::{DataLossReport, Diagnostics, FitOptions, PhoenixOptions, QueueDiscipline};
use phoenix_core::sim::{generate_topology, run_simulation, MoteAccounting, SimConfig, TopologyKind, DAY};

use crate::manifest::{recorded_args, RunManifest};
use crate::{Cli, Command, Evaluate, GenTopology, Reconstruct, Rerun, Simulate, SimKnobs, Sweep};

/// Flags whose values are file or directory paths.
const PATH_FLAGS: &[&str] =
    &["--from", "--config", "--topology", "--anchors", "--samples", "--reconstruction", "--truth", "--manifest"];

pub fn run(cli: Cli, raw: &[OsString]) -> Result<()> {
    let name = cli.command.name();
    let default_out = cli.out_root.join(name);
    let args = || recorded_args(raw, name, PATH_FLAGS);
    match cli.command {
        Command::GenTopology(a) => gen_topology(a, default_out, args()?),
        Command::Simulate(a) => simulate(a, default_out, args()?),
        Command::Reconstruct(a) => reconstruct(a, default_out, args()?),
        Command::Evaluate(a) => evaluate_cmd(a, default_out, args()?),
        Command::Sweep(a) => sweep(a, default_out, args()?),
        Command::Rerun(a) => rerun(a, default_out),
    }
}

fn out_dir(out: Option<PathBuf>, default: PathBuf) -> Result<PathBuf> {
    let dir = out.unwrap_or(default);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn gen_topology(a: GenTopology, default_out: PathBuf, args: Vec<String>) -> Result<()> {
    let mut topo = match a.kind.as_str() {
        "file" => load_topology(a.from.as_deref().context("--kind file needs --from")?)?,
        k => generate_topology(k.parse::<TopologyKind>().map_err(anyhow::Error::msg)?, a.n, a.extent, a.seed)
            .map_err(anyhow::Error::msg)?,
    };
    if let Some(g) = a.gps_mote {
        topo.gps_mote = g;
    }
    topo.validate().map_err(anyhow::Error::msg)?;
    let dir = out_dir(a.out, default_out)?;
    save_topology(&dir.join("topology.csv"), &topo)?;
    let mut m = RunManifest::new("gen-topology", args);
    m.seed = Some(a.seed);
    m.topology = Some("topology.csv".into());
    m.outputs.push("topology.csv".into());
    m.save(&dir)?;
    println!("{} motes, GPS mote {} -> {}", topo.motes.len(), topo.gps_mote, dir.display());
    Ok(())
}

impl SimKnobs {
    fn settings(&self) -> Vec<String> {
        let mut s = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                s.push(format!("{k} = {v}"));
            }
        };
        put("duration_s", self.duration_days.map(|d| (d * DAY).to_string()));
        put("sample_interval_s", self.sample_interval.map(|v| v.to_string()));
        put("t_beacon_s", self.t_beacon.map(|v| v.to_string()));
        put("t_wakeup_s", self.t_wakeup.map(|v| v.to_string()));
        put("t_listen_s", self.t_listen.map(|v| v.to_string()));
        put("t_sync_s", self.t_sync.map(|v| v.to_string()));
        put("skew_ppm_range", self.skew_ppm.clone());
        put("p_down", self.p_down.map(|v| v.to_string()));
        put("comm_delay_range_ms", self.comm_delay_ms.clone());
        put("numseg", self.numseg.map(|v| v.to_string()));
        put("eviction_policy", self.eviction.clone());
        put("prr_cutoff", self.prr_cutoff.map(|v| v.to_string()));
        put("prr_override", self.prr_override.map(|v| v.to_string()));
        put("gps_outage", self.gps_outage.clone());
        put("gps_fault", self.gps_fault.clone());
        put("basestation_interval_s", self.basestation_interval.map(|v| v.to_string()));
        put("segment_model", self.segment_model.clone());
        put("beacon_airtime_s", self.beacon_airtime.map(|v| v.to_string()));
        put("anchor_record_bytes", self.anchor_record_bytes.map(|v| v.to_string()));
        put("quantize_us", self.no_quantize.then(|| "false".to_string()));
        for kv in &self.set {
            s.push(kv.replacen('=', " = ", 1));
        }
        s
    }

    fn apply(&self, cfg: &mut SimConfig) -> Result<()> {
        let text = self.settings().join("\n");
        apply_settings(cfg, &text, None).context("in command-line settings")?;
        Ok(())
    }
}

fn base_config(path: Option<&Path>) -> Result<SimConfig> {
    Ok(match path {
        Some(p) => load_config(p)?,
        None => SimConfig::default(),
    })
}

fn simulate(a: Simulate, default_out: PathBuf, args: Vec<String>) -> Result<()> {
    let mut cfg = base_config(a.config.as_deref())?;
    a.knobs.apply(&mut cfg)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let topo = match &a.topology {
        Some(p) => load_topology(p)?,
        None => generate_topology(TopologyKind::UniformRandom, a.motes, a.extent, cfg.seed).map_err(anyhow::Error::msg)?,
    };
    let trace = run_simulation(&cfg, &topo)?;

    let dir = out_dir(a.out, default_out)?;
    let rows: Vec<SampleRow> = trace
        .samples
        .iter()
        .map(|s| SampleRow {
            segment: s.segment,
            lc: s.lc,
            payload_bytes: cfg.sample_bytes as u32,
            true_gts: Some(s.true_gts),
        })
        .collect();
    save_config(&dir.join("config.txt"), &cfg)?;
    save_topology(&dir.join("topology.csv"), &topo)?;
    save_anchors(&dir.join("anchors.csv"), &trace.anchors)?;
    save_anchors(&dir.join("base_anchors.csv"), &trace.base_anchors)?;
    save_samples(&dir.join("samples.csv"), &rows, false)?;
    save_samples(&dir.join("samples_truth.csv"), &rows, true)?;
    save_truth(&dir.join("truth.csv"), &trace.truth)?;
    save_accounting(&dir.join("accounting.csv"), &trace.accounting)?;

    let mut m = RunManifest::new("simulate", args);
    m.seed = Some(cfg.seed);
    m.config = Some(format_config(&cfg));
    m.topology = Some("topology.csv".into());
    m.outputs = ["config.txt", "topology.csv", "anchors.csv", "base_anchors.csv", "samples.csv", "samples_truth.csv", "truth.csv", "accounting.csv"]
        .map(String::from)
        .to_vec();
    m.save(&dir)?;
    println!(
        "{} segments, {} anchors, {} samples -> {}",
        trace.truth.len(),
        trace.anchors.len(),
        trace.samples.len(),
        dir.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ReconSummary {
    algo: Algo,
    segments: usize,
    reconstructed: usize,
    loss: DataLossReport,
    diagnostics: Option<Diagnostics>,
}

fn reconstruct(a: Reconstruct, default_out: PathBuf, args: Vec<String>) -> Result<()> {
    let algo: Algo = a.algo.parse().map_err(anyhow::Error::msg)?;
    let queue = match a.queue.as_str() {
        "priority" => QueueDiscipline::Priority,
        _ => QueueDiscipline::Fifo,
    };
    if a.min_fit_points < 2 {
        bail!("--min-fit-points must be at least 2");
    }
    let mut anchors = Vec::new();
    for p in &a.anchors {
        anchors.extend(load_anchors(p)?);
    }
    let samples: Vec<_> = load_samples(&a.samples)?.iter().map(|r| (r.segment, r.lc)).collect();
    let out = reconstruct_with(
        algo,
        &anchors,
        &samples,
        &FitOptions { min_fit_points: a.min_fit_points },
        &PhoenixOptions { queue },
    );

    let dir = out_dir(a.out, default_out)?;
    save_fits(&dir.join("fits.csv"), &out.fits)?;
    save_timestamps(&dir.join("timestamps.csv"), &samples, &out.gts)?;
    let reconstructed = out.fits.values().filter(|f| !f.is_sentinel()).count();
    let summary = ReconSummary {
        algo,
        segments: out.fits.len(),
        reconstructed,
        loss: out.loss,
        diagnostics: out.diagnostics,
    };
    save_json(&dir.join("diagnostics.json"), &summary)?;
    let mut m = RunManifest::new("reconstruct", args);
    m.outputs = ["fits.csv", "timestamps.csv", "diagnostics.json"].map(String::from).to_vec();
    m.save(&dir)?;
    println!(
        "{algo}: {reconstructed}/{} segments, {}/{} samples lost -> {}",
        summary.segments,
        out.loss.lost,
        out.loss.total,
        dir.display()
    );
    Ok(())
}

fn evaluate_cmd(a: Evaluate, default_out: PathBuf, args: Vec<String>) -> Result<()> {
    let fits = load_fits(&a.reconstruction.join("fits.csv"))?;
    let samples: Vec<_> =
        load_timestamps(&a.reconstruction.join("timestamps.csv"))?.iter().map(|r| (r.segment, r.lc)).collect();
    let truth = load_truth(&a.truth.join("truth.csv"))?;
    let acct_path = a.truth.join("accounting.csv");
    let totals = if acct_path.exists() {
        let mut t = MoteAccounting { mote: u32::MAX, ..Default::default() };
        for row in load_accounting(&acct_path)? {
            t.merge(&row);
        }
        Some(t)
    } else {
        None
    };
    let report = evaluate(&fits, &samples, &truth, totals.as_ref())?;

    let dir = out_dir(a.out, default_out)?;
    save_json(&dir.join("report.json"), &report)?;
    save_report_csv(&dir.join("report.csv"), &report)?;
    let mut m = RunManifest::new("evaluate", args);
    m.outputs = ["report.json", "report.csv"].map(String::from).to_vec();
    m.save(&dir)?;
    println!(
        "data loss {:.4}%, ppm mean {:.3} median {:.3} p99 {:.3}, alpha err {:.3} ppm, beta err {:.4} s -> {}",
        report.data_loss_pct,
        report.ppm.mean,
        report.ppm.median,
        report.ppm.p99,
        report.alpha_err_ppm.median,
        report.beta_err_s.median,
        dir.display()
    );
    Ok(())
}

fn sweep(a: Sweep, default_out: PathBuf, args: Vec<String>) -> Result<()> {
    let scenario: Scenario = a.scenario.parse().map_err(anyhow::Error::msg)?;
    if a.reps == 0 {
        bail!("--reps must be at least 1");
    }
    let mut scale = if a.paper_scale { Scale::PAPER } else { Scale::DESK };
    if let Some(n) = a.motes {
        scale.motes = n;
    }
    let mut spec = SweepSpec::new(scenario, scale);
    let mut base = base_config(a.config.as_deref())?;
    base.duration_s = spec.base.duration_s;
    a.knobs.apply(&mut base)?;
    base.validate()?;
    spec.base = base;
    if let Some(e) = a.extent {
        spec.extent_m = e;
    }
    if let Some(v) = a.values {
        if v.is_empty() {
            bail!("--values is empty");
        }
        spec.values = v;
    }
    spec.topology = a.topology.as_deref().map(load_topology).transpose()?;
    spec.reps = a.reps;
    spec.seed_base = a.seed_base;
    spec.jobs = a.jobs;

    let rows = run_sweep(&spec)?;
    let dir = out_dir(a.out, default_out)?;
    let path = dir.join("sweep.csv");
    let file = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_rows(std::io::BufWriter::new(file), &rows).with_context(|| format!("writing {}", path.display()))?;
    let mut m = RunManifest::new("sweep", args);
    m.seed = Some(spec.seed_base);
    m.config = Some(format_config(&spec.base));
    m.outputs.push("sweep.csv".into());
    m.save(&dir)?;

    println!("{scenario} ({}), {} rows -> {}", scenario.unit(), rows.len(), path.display());
    let algos: &[Algo] =
        if scenario == Scenario::BasestationAbsence { &[Algo::Phoenix, Algo::Rgtr] } else { &[Algo::Phoenix] };
    for &algo in algos {
        let loss = mean_by_param(&rows, algo, |r| r.data_loss_pct);
        let p99 = mean_by_param(&rows, algo, |r| r.ppm_p99);
        for ((p, l), (_, q)) in loss.iter().zip(&p99) {
            println!("  {algo:8} {p:>8}  loss {l:8.4}%  ppm p99 {q:8.3}");
        }
    }
    Ok(())
}

fn rerun(a: Rerun, default_out: PathBuf) -> Result<()> {
    let m = RunManifest::load(&a.manifest)?;
    if m.command == "rerun" {
        bail!("manifest describes a rerun, not a run");
    }
    let out = a.out.unwrap_or(default_out);
    let argv = m.replay_argv(&out);
    let cli = Cli::try_parse_from(&argv).with_context(|| format!("replaying {}", a.manifest.display()))?;
    run(cli, &argv[1..])?;
    if let Ok(new) = RunManifest::load(&out.join(crate::manifest::FILE)) {
        if new.config != m.config {
            eprintln!("warning: the effective config differs from the manifest snapshot; inputs have changed");
        }
    }
    Ok(())
}
