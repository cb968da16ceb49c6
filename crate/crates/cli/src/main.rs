//! `phoenix`: simulate mote networks, reconstruct global timestamps from
//! anchor logs, evaluate against ground truth and run parameter sweeps.
//!
//! Exit status: 0 on success, 1 for invalid arguments or input data, 2 when
//! a file cannot be read or written.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "phoenix", version, about = "Global time reconstruction for reboot-prone sensor motes")]
pub struct Cli {
    /// Output root used when a command is given no --out; each command
    /// writes to <root>/<command>
    #[arg(long, global = true, env = "PHOENIX_OUT", default_value = "phoenix-out")]
    pub out_root: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate (or validate and normalize) a topology file
    GenTopology(GenTopology),
    /// Run the network simulator and write the trace file set
    Simulate(Simulate),
    /// Assign global timestamps from anchor logs
    Reconstruct(Reconstruct),
    /// Score a reconstruction against simulator ground truth
    Evaluate(Evaluate),
    /// Run one evaluation scenario over a parameter range
    Sweep(Sweep),
    /// Repeat a run from its manifest
    Rerun(Rerun),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenTopology(_) => "gen-topology",
            Command::Simulate(_) => "simulate",
            Command::Reconstruct(_) => "reconstruct",
            Command::Evaluate(_) => "evaluate",
            Command::Sweep(_) => "sweep",
            Command::Rerun(_) => "rerun",
        }
    }
}

#[derive(Debug, Args)]
pub struct GenTopology {
    /// grid, uniform-random, or file (normalize the file given by --from)
    #[arg(long, default_value = "uniform-random", value_parser = ["grid", "uniform-random", "file"])]
    pub kind: String,
    /// Number of motes
    #[arg(long, default_value_t = 53)]
    pub n: usize,
    /// Side length of the square field, meters
    #[arg(long, default_value_t = 200.0)]
    pub extent: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Topology file to read with --kind file
    #[arg(long, required_if_eq("kind", "file"))]
    pub from: Option<PathBuf>,
    /// Mote acting as the GPS source [default: lowest id]
    #[arg(long)]
    pub gps_mote: Option<u32>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Simulation knobs; each overrides the config file (or built-in default).
#[derive(Debug, Clone, Default, Args)]
pub struct SimKnobs {
    /// Simulated run length in days [default: 365]
    #[arg(long)]
    pub duration_days: Option<f64>,
    /// Local-clock seconds between samples [default: 600]
    #[arg(long)]
    pub sample_interval: Option<f64>,
    /// Beacon period, seconds [default: 30]
    #[arg(long)]
    pub t_beacon: Option<f64>,
    /// Listen-window period, seconds [default: 21600]
    #[arg(long)]
    pub t_wakeup: Option<f64>,
    /// Maximum listen-window length, seconds [default: 30]
    #[arg(long)]
    pub t_listen: Option<f64>,
    /// GPS reference period, seconds [default: 21600]
    #[arg(long)]
    pub t_sync: Option<f64>,
    /// Clock skew range in ppm as LO,HI [default: 40,70]
    #[arg(long, value_name = "LO,HI")]
    pub skew_ppm: Option<String>,
    /// Probability of downtime after a reboot [default: 0.2]
    #[arg(long)]
    pub p_down: Option<f64>,
    /// Beacon delivery delay range in ms as LO,HI [default: 5,15]
    #[arg(long, value_name = "LO,HI")]
    pub comm_delay_ms: Option<String>,
    /// Anchor slots per mote [default: 4]
    #[arg(long)]
    pub numseg: Option<usize>,
    /// Slot policy: fcfs, rand or llc [default: fcfs]
    #[arg(long)]
    pub eviction: Option<String>,
    /// Links below this PRR are not simulated [default: 0.01]
    #[arg(long)]
    pub prr_cutoff: Option<f64>,
    /// Fixed PRR for every link instead of the path-loss model [default: none]
    #[arg(long)]
    pub prr_override: Option<f64>,
    /// GPS outage as START_S,LENGTH_S [default: none]
    #[arg(long, value_name = "START_S,LENGTH_S")]
    pub gps_outage: Option<String>,
    /// GPS fault as START_S,LENGTH_S,MU_S,SIGMA_S [default: none]
    #[arg(long, value_name = "START_S,LENGTH_S,MU_S,SIGMA_S")]
    pub gps_fault: Option<String>,
    /// Basestation reference period, seconds [default: none]
    #[arg(long)]
    pub basestation_interval: Option<f64>,
    /// lognormal:MEDIAN_S:SIGMA, fixed:LENGTH_S, never or empirical:PATH
    /// [default: lognormal:345600:1]
    #[arg(long)]
    pub segment_model: Option<String>,
    /// Airtime of one beacon, seconds [default: 0.0225]
    #[arg(long)]
    pub beacon_airtime: Option<f64>,
    /// Bytes stored per anchor [default: 16]
    #[arg(long)]
    pub anchor_record_bytes: Option<u64>,
    /// Keep clock readings at full precision instead of whole microseconds
    #[arg(long)]
    pub no_quantize: bool,
    /// Any config key, as KEY=VALUE (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct Simulate {
    /// key = value config file [default: built-in defaults]
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Topology file [default: uniform-random with --motes and --extent]
    #[arg(long)]
    pub topology: Option<PathBuf>,
    /// Motes in the generated topology
    #[arg(long, default_value_t = 53)]
    pub motes: usize,
    /// Field side length of the generated topology, meters
    #[arg(long, default_value_t = 200.0)]
    pub extent: f64,
    /// Random seed [default: config value, else 1]
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub knobs: SimKnobs,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Reconstruct {
    /// Anchor file; repeat to merge several (e.g. a basestation log)
    #[arg(long, required = true)]
    pub anchors: Vec<PathBuf>,
    /// Sample file (a ground-truth column, if present, is ignored)
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long, default_value = "phoenix", value_parser = ["phoenix", "rgtr"])]
    pub algo: String,
    /// Queue discipline of the global-fit search
    #[arg(long, default_value = "fifo", value_parser = ["fifo", "priority"])]
    pub queue: String,
    /// Fewest anchor points that make a usable fit
    #[arg(long, default_value_t = phoenix_core::model::DEFAULT_MIN_FIT_POINTS)]
    pub min_fit_points: usize,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Evaluate {
    /// Directory written by `reconstruct`
    #[arg(long)]
    pub reconstruction: PathBuf,
    /// Directory written by `simulate` (truth.csv, optional accounting.csv)
    #[arg(long)]
    pub truth: PathBuf,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Sweep {
    /// gps-absence, t-wakeup, numseg, density, fault-injection, eviction or
    /// basestation-absence
    #[arg(long)]
    pub scenario: String,
    /// Base config file [default: built-in defaults]
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Fixed topology file [default: uniform-random per rep]
    #[arg(long)]
    pub topology: Option<PathBuf>,
    /// Repetitions per value
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Rep r uses seed seed-base + r
    #[arg(long, default_value_t = 1)]
    pub seed_base: u64,
    /// Worker threads
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// 53 motes for 365 days instead of 20 motes for 60 days
    #[arg(long)]
    pub paper_scale: bool,
    /// Motes per generated topology [default: from scale]
    #[arg(long)]
    pub motes: Option<usize>,
    /// Field side length, meters [default: 200 * sqrt(motes / 53)]
    #[arg(long)]
    pub extent: Option<f64>,
    /// Comma-separated parameter values [default: scenario preset]
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    #[command(flatten)]
    pub knobs: SimKnobs,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Rerun {
    /// manifest.json of the run to repeat
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let io = err.chain().any(|c| {
        c.downcast_ref::<std::io::Error>().is_some()
            || c.downcast_ref::<phoenix_core::io::FormatError>().is_some_and(|f| f.is_io())
    });
    if io {
        2
    } else {
        1
    }
}

/// The error chain joined with ": ", skipping causes already spelled out by
/// the message before them.
fn message(err: &anyhow::Error) -> String {
    let mut out = err.to_string();
    let mut last = out.clone();
    for cause in err.chain().skip(1) {
        let c = cause.to_string();
        if !last.contains(&c) {
            out.push_str(": ");
            out.push_str(&c);
        }
        last = c;
    }
    out
}

fn main() -> ExitCode {
    let raw: Vec<OsString> = std::env::args_os().collect();
    let cli = match Cli::try_parse_from(&raw) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli, &raw[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
