//! Offline reconstruction: anchor bucketing, the fit graph, the
//! label-correcting global-fit search, the direct-fit baseline and
//! timestamp assignment.

mod assign;
mod graph;
mod phoenix;
mod rgtr;
mod store;

pub use assign::{assign_timestamps, DataLossReport};
pub use graph::{build_fit_graph, DroppedFit, FitGraph, FitOptions};
pub use phoenix::{phoenix, Acceptance, Diagnostics, PhoenixOptions, QueueDiscipline, Reconstruction};
pub use rgtr::{mote_alpha_hints, rgtr, rgtr_baseline};
pub use store::{build_anchor_store, AnchorStore};

use crate::model::AnchorRecord;
use crate::scalar::Scalar;

/// Anchors to global fits in one call.
pub fn reconstruct<T: Scalar>(
    records: &[AnchorRecord<T>],
    fit: &FitOptions,
    opts: &PhoenixOptions,
) -> Reconstruction<T> {
    let store = build_anchor_store(records);
    phoenix(&build_fit_graph(&store, fit), opts)
}
