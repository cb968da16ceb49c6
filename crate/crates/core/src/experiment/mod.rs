//! End-to-end runs: simulate, reconstruct, evaluate; parameter sweeps over
//! the evaluation scenarios; and synthetic traces for runtime scaling.

mod pipeline;
mod scaling;
mod sweep;

pub use pipeline::{reconstruct_with, run_pipeline, visible_anchors, Algo, Outcome, PipelineError, Run};
pub use scaling::{loglog_slope, scaling_trace, time_reconstruction};
pub use sweep::{apply, mean_by_param, read_rows, run_sweep, write_rows, Scale, Scenario, SweepRow, SweepSpec};
