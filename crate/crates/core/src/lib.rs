//! Postmortem global-time reconstruction for sensor motes whose clocks
//! reset on every reboot.
//!
//! * [`model`]: segments, anchors, least-squares clock fits and fit composition.
//! * [`recon`]: the epidemic reconstruction over the segment fit graph and a
//!   direct-fit baseline.
//! * [`sim`]: a seeded simulator of a beaconing, rebooting mote network with
//!   hidden ground truth.
//! * [`metrics`]: data loss, PPM error, space overhead, duty cycle and the
//!   α/β error split.
//! * [`io`]: CSV and key=value file formats.
//! * [`experiment`]: pipeline runs, sweeps and run manifests.

pub mod experiment;
pub mod io;
pub mod metrics;
pub mod model;
pub mod recon;
pub mod scalar;
pub mod sim;

pub use model::{AnchorRecord, GlobalFit, LocalFit, ModelError, SegmentId};
pub use scalar::Scalar;

pub type Anchor = model::AnchorRecord<f64>;
pub type Fit = model::LocalFit<f64>;
pub type Global = model::GlobalFit<f64>;
pub type Store = recon::AnchorStore<f64>;
pub type Graph = recon::FitGraph<f64>;
pub type Recon = recon::Reconstruction<f64>;

pub type Anchor32 = model::AnchorRecord<f32>;
pub type Fit32 = model::LocalFit<f32>;
pub type Global32 = model::GlobalFit<f32>;
