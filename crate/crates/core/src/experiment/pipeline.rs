use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{evaluate, EvalReport, MetricError};
use crate::model::{AnchorRecord, GlobalFit, SegmentId};
use crate::recon::{
    assign_timestamps, build_anchor_store, reconstruct, rgtr, DataLossReport, Diagnostics, FitOptions,
    PhoenixOptions,
};
use crate::sim::{run_simulation, SimConfig, SimError, SimTrace, Topology};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    #[default]
    Phoenix,
    Rgtr,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Phoenix => "phoenix",
            Algo::Rgtr => "rgtr",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "phoenix" => Ok(Algo::Phoenix),
            "rgtr" => Ok(Algo::Rgtr),
            _ => Err(format!("unknown algorithm {s:?} (expected phoenix or rgtr)")),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub fits: BTreeMap<SegmentId, GlobalFit>,
    /// Only the label-correcting search produces diagnostics.
    pub diagnostics: Option<Diagnostics>,
    pub gts: Vec<Option<f64>>,
    pub loss: DataLossReport,
}

/// Reconstruct from whatever anchors the caller chooses to expose.
pub fn reconstruct_with(
    algo: Algo,
    anchors: &[AnchorRecord],
    samples: &[(SegmentId, f64)],
    fit: &FitOptions,
    opts: &PhoenixOptions,
) -> Outcome {
    let (fits, diagnostics) = match algo {
        Algo::Phoenix => {
            let r = reconstruct(anchors, fit, opts);
            (r.fits, Some(r.diagnostics))
        }
        Algo::Rgtr => (rgtr(&build_anchor_store(anchors)), None),
    };
    let (gts, loss) = assign_timestamps(samples, &fits);
    Outcome { fits, diagnostics, gts, loss }
}

/// Anchors an algorithm sees for a finished trace: Phoenix uses what the
/// motes stored; the baseline uses every global reference available,
/// including a basestation log when one was simulated.
pub fn visible_anchors(trace: &SimTrace, algo: Algo) -> Vec<AnchorRecord> {
    match algo {
        Algo::Phoenix => trace.anchors.clone(),
        Algo::Rgtr => trace.anchors.iter().chain(&trace.base_anchors).filter(|a| a.is_global()).copied().collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub trace: SimTrace,
    pub outcome: Outcome,
    pub report: EvalReport,
}

/// Simulate, reconstruct and evaluate in memory.
pub fn run_pipeline(cfg: &SimConfig, topo: &Topology, algo: Algo) -> Result<Run, PipelineError> {
    let trace = run_simulation(cfg, topo)?;
    let samples = trace.sample_points();
    let outcome =
        reconstruct_with(algo, &visible_anchors(&trace, algo), &samples, &FitOptions::default(), &PhoenixOptions::default());
    let report = evaluate(&outcome.fits, &samples, &trace.truth, Some(&trace.totals()))?;
    Ok(Run { trace, outcome, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_topology, SegmentModel, TopologyKind, DAY};

    #[test]
    fn algo_names_round_trip() {
        for a in [Algo::Phoenix, Algo::Rgtr] {
            assert_eq!(a.name().parse::<Algo>(), Ok(a));
        }
        assert!("olin".parse::<Algo>().is_err());
    }

    #[test]
    fn small_network_reconstructs() {
        let cfg = SimConfig { duration_s: 6.0 * DAY, segment_model: SegmentModel::Never, seed: 3, ..Default::default() };
        let topo = generate_topology(TopologyKind::Grid, 4, 40.0, 0).unwrap();
        let run = run_pipeline(&cfg, &topo, Algo::Phoenix).unwrap();
        assert_eq!(run.report.data_loss_pct, 0.0);
        assert!(run.report.ppm.p99 < 10.0, "{:?}", run.report.ppm);

        let base = run_pipeline(&cfg, &topo, Algo::Rgtr).unwrap();
        // Only the GPS mote has global references.
        assert_eq!(base.report.data_loss_pct, 75.0);
    }
}
