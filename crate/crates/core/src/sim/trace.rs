use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{AnchorRecord, SegmentId};

/// Hidden ground truth for one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentTruth {
    pub segment: SegmentId,
    /// Real time at which the clock started (equal to `beta`).
    pub boot_s: f64,
    /// Real time at which the segment ended or the run stopped.
    pub end_s: f64,
    pub skew_ppm: f64,
    /// Global seconds per local second.
    pub alpha: f64,
    pub beta: f64,
}

impl SegmentTruth {
    pub fn new(segment: SegmentId, boot_s: f64, end_s: f64, skew_ppm: f64) -> Self {
        let rate = 1.0 + skew_ppm * 1e-6;
        Self { segment, boot_s, end_s, skew_ppm, alpha: 1.0 / rate, beta: boot_s }
    }

    /// Local clock rate relative to real time.
    pub fn rate(&self) -> f64 {
        1.0 + self.skew_ppm * 1e-6
    }

    pub fn gts(&self, lc: f64) -> f64 {
        self.alpha * lc + self.beta
    }

    pub fn local_at(&self, t: f64) -> f64 {
        (t - self.boot_s) * self.rate()
    }

    /// Local clock reading at the end of the segment.
    pub fn local_span(&self) -> f64 {
        self.local_at(self.end_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub segment: SegmentId,
    pub lc: f64,
    pub true_gts: f64,
}

/// Real send and receive instants of an anchor (equal for global anchors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorTiming {
    pub sent_s: f64,
    pub received_s: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MoteAccounting {
    pub mote: u32,
    pub segments: u64,
    pub alive_s: f64,
    pub listen_s: f64,
    pub listen_windows: u64,
    pub early_exits: u64,
    pub beacons: u64,
    pub beacon_s: f64,
    pub anchors: u64,
    pub anchor_bytes: u64,
    pub samples: u64,
    pub sample_bytes: u64,
}

impl MoteAccounting {
    pub fn radio_on_s(&self) -> f64 {
        self.listen_s + self.beacon_s
    }

    pub fn merge(&mut self, o: &MoteAccounting) {
        self.segments += o.segments;
        self.alive_s += o.alive_s;
        self.listen_s += o.listen_s;
        self.listen_windows += o.listen_windows;
        self.early_exits += o.early_exits;
        self.beacons += o.beacons;
        self.beacon_s += o.beacon_s;
        self.anchors += o.anchors;
        self.anchor_bytes += o.anchor_bytes;
        self.samples += o.samples;
        self.sample_bytes += o.sample_bytes;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub seed: u64,
    /// Anchors stored on motes, in reception order.
    pub anchors: Vec<AnchorRecord<f64>>,
    /// Parallel to `anchors`.
    pub anchor_timing: Vec<AnchorTiming>,
    /// Global anchors logged by a basestation, if one was configured.
    pub base_anchors: Vec<AnchorRecord<f64>>,
    pub samples: Vec<Sample>,
    pub truth: BTreeMap<SegmentId, SegmentTruth>,
    pub accounting: Vec<MoteAccounting>,
}

impl SimTrace {
    pub fn totals(&self) -> MoteAccounting {
        let mut t = MoteAccounting { mote: u32::MAX, ..Default::default() };
        for a in &self.accounting {
            t.merge(a);
        }
        t
    }

    pub fn sample_points(&self) -> Vec<(SegmentId, f64)> {
        self.samples.iter().map(|s| (s.segment, s.lc)).collect()
    }

    pub fn pair_anchor_count(&self) -> usize {
        self.anchors.iter().filter(|a| !a.is_global()).count()
    }
}
