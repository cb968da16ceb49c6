use std::time::{Duration, Instant};

use crate::recon::{build_anchor_store, build_fit_graph, phoenix, FitOptions, PhoenixOptions};
use crate::sim::{generate_topology, run_simulation, SegmentModel, SimConfig, SimError, SimTrace, TopologyKind, DAY};

/// A simulated trace with roughly `motes * segments_per_mote` segments.
/// Segments last about a day with no downtime, so the run length sets the
/// graph size.
pub fn scaling_trace(motes: usize, segments_per_mote: usize, seed: u64) -> Result<SimTrace, SimError> {
    let cfg = SimConfig {
        duration_s: segments_per_mote as f64 * DAY,
        segment_model: SegmentModel::LogNormal { median_s: DAY, sigma: 0.25 },
        p_down: 0.0,
        seed,
        ..Default::default()
    };
    let topo = generate_topology(TopologyKind::Grid, motes, 60.0, seed).map_err(SimError::Topology)?;
    run_simulation(&cfg, &topo)
}

/// Wall time of graph construction plus the global-fit search, best of
/// `repeats`.
pub fn time_reconstruction(trace: &SimTrace, repeats: usize) -> Duration {
    (0..repeats.max(1))
        .map(|_| {
            let t = Instant::now();
            let store = build_anchor_store(&trace.anchors);
            let graph = build_fit_graph(&store, &FitOptions::default());
            let r = phoenix(&graph, &PhoenixOptions::default());
            std::hint::black_box(r);
            t.elapsed()
        })
        .min()
        .expect("at least one repeat")
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
