use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{reconstruct_with, run_pipeline, Algo, PipelineError, Run};
use crate::io::FormatError;
use crate::metrics::{evaluate, EvalReport};
use crate::model::AnchorRecord;
use crate::recon::{FitOptions, PhoenixOptions};
use crate::sim::{
    generate_topology, run_simulation, EvictionPolicy, Fault, Interval, SimConfig, Topology, TopologyKind, DAY, HOUR,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    GpsAbsence,
    TWakeup,
    Numseg,
    Density,
    FaultInjection,
    Eviction,
    /// Phoenix against the direct-fit baseline while a logging basestation
    /// is unreachable for N days.
    BasestationAbsence,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::GpsAbsence,
        Scenario::TWakeup,
        Scenario::Numseg,
        Scenario::Density,
        Scenario::FaultInjection,
        Scenario::Eviction,
        Scenario::BasestationAbsence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::GpsAbsence => "gps-absence",
            Scenario::TWakeup => "t-wakeup",
            Scenario::Numseg => "numseg",
            Scenario::Density => "density",
            Scenario::FaultInjection => "fault-injection",
            Scenario::Eviction => "eviction",
            Scenario::BasestationAbsence => "basestation-absence",
        }
    }

    /// What the swept parameter value means.
    pub fn unit(self) -> &'static str {
        match self {
            Scenario::GpsAbsence => "GPS outage length, days",
            Scenario::TWakeup => "wake-up period, hours",
            Scenario::Numseg => "anchor slots",
            Scenario::Density => "PRR cutoff below which links are removed",
            Scenario::FaultInjection => "GPS fault window length, days",
            Scenario::Eviction => "policy index: 0 fcfs, 1 rand, 2 llc",
            Scenario::BasestationAbsence => "basestation outage length, days",
        }
    }

    pub fn default_values(self, scale: Scale) -> Vec<f64> {
        let paper = scale == Scale::PAPER;
        match self {
            Scenario::GpsAbsence if paper => (0..=15).map(|i| f64::from(i) * 10.0).collect(),
            Scenario::GpsAbsence => vec![0.0, 10.0, 20.0, 30.0, 40.0],
            Scenario::TWakeup => vec![1.0, 3.0, 6.0, 12.0, 24.0],
            Scenario::Numseg => vec![1.0, 2.0, 4.0, 8.0, 16.0],
            Scenario::Density => vec![0.01, 0.1, 0.3, 0.5, 0.7, 0.9],
            Scenario::FaultInjection if paper => vec![0.0, 10.0, 30.0, 60.0],
            Scenario::FaultInjection => vec![0.0, 5.0, 10.0, 20.0],
            Scenario::Eviction => vec![0.0, 1.0, 2.0],
            Scenario::BasestationAbsence => (0..=9).map(|i| f64::from(i) * 2.0).collect(),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<_> = Scenario::ALL.iter().map(|x| x.name()).collect();
            format!("unknown scenario {s:?} (expected one of {})", names.join(", "))
        })
    }
}

/// Network size and run length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scale {
    pub motes: usize,
    pub duration_days: f64,
}

impl Scale {
    pub const DESK: Scale = Scale { motes: 20, duration_days: 60.0 };
    pub const PAPER: Scale = Scale { motes: 53, duration_days: 365.0 };

    /// Field side length that keeps node density constant as `motes` varies.
    pub fn extent_m(&self) -> f64 {
        200.0 * (self.motes as f64 / 53.0).sqrt()
    }
}

/// Where in the run the swept outage or fault window starts.
fn window_start(cfg: &SimConfig, scenario: Scenario) -> f64 {
    match scenario {
        Scenario::BasestationAbsence => (cfg.duration_s / 3.0).floor(),
        _ => (cfg.duration_s / 6.0).floor(),
    }
}

const BASESTATION_INTERVAL_S: f64 = 6.0 * HOUR;
const POLICIES: [EvictionPolicy; 3] = [EvictionPolicy::Fcfs, EvictionPolicy::Rand, EvictionPolicy::Llc];

/// Apply one swept value to a base configuration.
pub fn apply(scenario: Scenario, base: &SimConfig, value: f64) -> Result<SimConfig, String> {
    let mut c = base.clone();
    let start = window_start(base, scenario);
    match scenario {
        Scenario::GpsAbsence => {
            c.gps_outage = (value > 0.0).then_some(Interval { start_s: start, length_s: value * DAY });
        }
        Scenario::TWakeup => c.t_wakeup_s = value * HOUR,
        Scenario::Numseg => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(format!("numseg must be a positive integer, got {value}"));
            }
            c.numseg = value as usize;
        }
        Scenario::Density => c.prr_cutoff = value,
        Scenario::FaultInjection => {
            c.gps_fault = (value > 0.0).then_some(Fault {
                window: Interval { start_s: start, length_s: value * DAY },
                mu_s: 3600.0,
                sigma_s: 600.0,
            });
        }
        Scenario::Eviction => {
            c.eviction_policy = *POLICIES
                .get(value as usize)
                .filter(|_| value.fract() == 0.0 && value >= 0.0)
                .ok_or_else(|| format!("eviction index must be 0, 1 or 2, got {value}"))?;
        }
        Scenario::BasestationAbsence => {
            c.basestation_interval_s = Some(BASESTATION_INTERVAL_S);
            c.basestation_outage = (value > 0.0).then_some(Interval { start_s: start, length_s: value * DAY });
        }
    }
    Ok(c)
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub scenario: Scenario,
    /// Duration and all unswept knobs come from here.
    pub base: SimConfig,
    pub motes: usize,
    pub extent_m: f64,
    /// Fixed topology; otherwise a uniform-random one is drawn per rep.
    pub topology: Option<Topology>,
    pub values: Vec<f64>,
    pub reps: usize,
    pub seed_base: u64,
    pub jobs: usize,
}

impl SweepSpec {
    pub fn new(scenario: Scenario, scale: Scale) -> Self {
        Self {
            scenario,
            base: SimConfig { duration_s: scale.duration_days * DAY, ..Default::default() },
            motes: scale.motes,
            extent_m: scale.extent_m(),
            topology: None,
            values: scenario.default_values(scale),
            reps: 10,
            seed_base: 1,
            jobs: 1,
        }
    }
}

/// One CSV row: the knobs of a run and its metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: Scenario,
    pub param: f64,
    pub rep: usize,
    pub seed: u64,
    pub algo: Algo,
    pub motes: usize,
    pub duration_days: f64,
    pub numseg: usize,
    pub eviction: EvictionPolicy,
    pub t_wakeup_s: f64,
    pub prr_cutoff: f64,
    pub gps_outage_days: f64,
    pub fault_days: f64,
    pub basestation_outage_days: f64,
    pub segments: usize,
    pub reconstructed: usize,
    pub samples: usize,
    pub lost: usize,
    pub data_loss_pct: f64,
    pub ppm_mean: f64,
    pub ppm_median: f64,
    pub ppm_p99: f64,
    pub ppm_max: f64,
    pub alpha_med_ppm: f64,
    pub alpha_std_ppm: f64,
    pub beta_med_s: f64,
    pub beta_std_s: f64,
    pub space_overhead_pct: f64,
    pub duty_cycle_pct: f64,
    pub beacon_duty_cycle_pct: f64,
    pub anchors: u64,
}

impl SweepRow {
    /// `point` is (scenario, param, rep); `size` is (motes, segments).
    fn new(point: (Scenario, f64, usize), algo: Algo, cfg: &SimConfig, size: (usize, usize), r: &EvalReport) -> Self {
        let ((scenario, param, rep), (motes, segments)) = (point, size);
        let days = |iv: Option<Interval>| iv.map_or(0.0, |i| i.length_s / DAY);
        Self {
            scenario,
            param,
            rep,
            seed: cfg.seed,
            algo,
            motes,
            duration_days: cfg.duration_s / DAY,
            numseg: cfg.numseg,
            eviction: cfg.eviction_policy,
            t_wakeup_s: cfg.t_wakeup_s,
            prr_cutoff: cfg.prr_cutoff,
            gps_outage_days: days(cfg.gps_outage),
            fault_days: days(cfg.gps_fault.map(|f| f.window)),
            basestation_outage_days: days(cfg.basestation_outage),
            segments,
            reconstructed: r.reconstructed_segments,
            samples: r.total,
            lost: r.lost,
            data_loss_pct: r.data_loss_pct,
            ppm_mean: r.ppm.mean,
            ppm_median: r.ppm.median,
            ppm_p99: r.ppm.p99,
            ppm_max: r.ppm.max,
            alpha_med_ppm: r.alpha_err_ppm.median,
            alpha_std_ppm: r.alpha_err_ppm.std,
            beta_med_s: r.beta_err_s.median,
            beta_std_s: r.beta_err_s.std,
            space_overhead_pct: r.space_overhead_pct.unwrap_or(0.0),
            duty_cycle_pct: r.duty_cycle_pct.unwrap_or(0.0),
            beacon_duty_cycle_pct: r.beacon_duty_cycle_pct.unwrap_or(0.0),
            anchors: 0,
        }
    }
}

fn topology_for(spec: &SweepSpec, seed: u64) -> Result<Topology, PipelineError> {
    match &spec.topology {
        Some(t) => Ok(t.clone()),
        None => generate_topology(TopologyKind::UniformRandom, spec.motes, spec.extent_m, seed)
            .map_err(|e| PipelineError::Sim(crate::sim::SimError::Topology(e))),
    }
}

fn run_point(spec: &SweepSpec, vi: usize, rep: usize) -> Result<Vec<SweepRow>, PipelineError> {
    let seed = spec.seed_base.wrapping_add(rep as u64);
    let topo = topology_for(spec, seed)?;
    let value = spec.values[vi];
    let mut cfg = apply(spec.scenario, &spec.base, value)
        .map_err(|e| PipelineError::Sim(crate::sim::ConfigError::Invalid(e).into()))?;
    cfg.seed = seed;
    let Run { trace, report, .. } = run_pipeline(&cfg, &topo, Algo::Phoenix)?;
    let mut row = SweepRow::new((spec.scenario, value, rep), Algo::Phoenix, &cfg, (topo.motes.len(), trace.truth.len()), &report);
    row.anchors = trace.anchors.len() as u64;
    Ok(vec![row])
}

/// The basestation outage is emulated on one trace per rep by hiding the
/// basestation's records inside nested windows, so every outage length is
/// compared on the same network history.
fn run_basestation_rep(spec: &SweepSpec, rep: usize) -> Result<Vec<SweepRow>, PipelineError> {
    let seed = spec.seed_base.wrapping_add(rep as u64);
    let topo = topology_for(spec, seed)?;
    let mut cfg = apply(Scenario::BasestationAbsence, &spec.base, 0.0).expect("no value checks");
    cfg.seed = seed;
    let trace = run_simulation(&cfg, &topo)?;
    let samples = trace.sample_points();
    let totals = trace.totals();
    let pairs: Vec<AnchorRecord> = trace.anchors.iter().filter(|a| !a.is_global()).copied().collect();
    let start = window_start(&cfg, Scenario::BasestationAbsence);

    let mut rows = Vec::new();
    for &n in &spec.values {
        let outage = Interval { start_s: start, length_s: n * DAY };
        let base: Vec<AnchorRecord> = trace.base_anchors.iter().filter(|a| !outage.contains(a.lc_s)).copied().collect();
        let row_cfg = SimConfig { basestation_outage: (n > 0.0).then_some(outage), ..cfg.clone() };
        for algo in [Algo::Phoenix, Algo::Rgtr] {
            let anchors: Vec<AnchorRecord> = match algo {
                Algo::Phoenix => pairs.iter().chain(&base).copied().collect(),
                Algo::Rgtr => base.clone(),
            };
            let out = reconstruct_with(algo, &anchors, &samples, &FitOptions::default(), &PhoenixOptions::default());
            let report = evaluate(&out.fits, &samples, &trace.truth, Some(&totals))?;
            let mut row = SweepRow::new((spec.scenario, n, rep), algo, &row_cfg, (topo.motes.len(), trace.truth.len()), &report);
            row.anchors = anchors.len() as u64;
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Run every (value, rep) point on up to `spec.jobs` threads. Rows come back
/// sorted by (value position, rep, algorithm), so the thread count never
/// changes the output.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs.max(1))
        .build()
        .expect("thread pool");
    let chunks: Vec<Vec<SweepRow>> = pool.install(|| {
        if spec.scenario == Scenario::BasestationAbsence {
            (0..spec.reps).into_par_iter().map(|rep| run_basestation_rep(spec, rep)).collect::<Result<_, _>>()
        } else {
            let points: Vec<(usize, usize)> =
                (0..spec.values.len()).flat_map(|v| (0..spec.reps).map(move |r| (v, r))).collect();
            points.into_par_iter().map(|(v, r)| run_point(spec, v, r)).collect::<Result<_, _>>()
        }
    })?;
    let pos = |p: f64| spec.values.iter().position(|&v| v == p).unwrap_or(usize::MAX);
    let mut rows: Vec<SweepRow> = chunks.into_iter().flatten().collect();
    rows.sort_by_key(|r| (pos(r.param), r.rep, r.algo));
    Ok(rows)
}

pub fn write_rows<W: Write>(out: W, rows: &[SweepRow]) -> Result<(), FormatError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| FormatError::parse(0, e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(input: R) -> Result<Vec<SweepRow>, FormatError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| FormatError::parse(i as u64 + 2, e.to_string())))
        .collect()
}

/// Mean of a column over reps, per swept value in sweep order.
pub fn mean_by_param(rows: &[SweepRow], algo: Algo, f: impl Fn(&SweepRow) -> f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for r in rows.iter().filter(|r| r.algo == algo) {
        match out.iter_mut().find(|(p, _, _)| *p == r.param) {
            Some(e) => {
                e.1 += f(r);
                e.2 += 1;
            }
            None => out.push((r.param, f(r), 1)),
        }
    }
    out.into_iter().map(|(p, s, n)| (p, s / n as f64)).collect()
}
