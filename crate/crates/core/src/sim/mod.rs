//! Network simulator producing anchors, samples and hidden ground truth.

mod config;
mod engine;
mod radio;
mod slots;
mod topology;
mod trace;

pub use config::{ConfigError, EvictionPolicy, Fault, Interval, PathLoss, SegmentModel, SimConfig, DAY, HOUR};
pub use engine::{run_simulation, SimError};
pub use radio::{link_prr, received_power_dbm};
pub use slots::{eviction_select, Heard, Slot, SlotTable};
pub use topology::{generate_topology, MotePosition, Topology, TopologyKind};
pub use trace::{AnchorTiming, MoteAccounting, Sample, SegmentTruth, SimTrace};
