use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{GlobalFit, SegmentId};
use crate::scalar::Scalar;

/// Counts of samples that could not be given a global timestamp.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataLossReport {
    pub lost: usize,
    pub total: usize,
}

/// Map each `(segment, local time)` sample to global time, or `None` when its
/// segment has no fit.
pub fn assign_timestamps<T: Scalar>(
    samples: &[(SegmentId, T)],
    fits: &BTreeMap<SegmentId, GlobalFit<T>>,
) -> (Vec<Option<T>>, DataLossReport) {
    let mut report = DataLossReport { lost: 0, total: samples.len() };
    let out = samples
        .iter()
        .map(|(seg, lc)| {
            let gts = fits.get(seg).and_then(|f| f.estimate(*lc).ok());
            if gts.is_none() {
                report.lost += 1;
            }
            gts
        })
        .collect();
    (out, report)
}
