use std::collections::{BTreeMap, BTreeSet};

use crate::model::{AnchorRecord, SegmentId};
use crate::scalar::Scalar;

/// Anchor points bucketed by segment pair.
///
/// Pair points are stored under `(smaller, larger)` with `x` read from the
/// smaller segment's clock, whichever side received the beacon. Global
/// anchors are kept per segment as `(lc, gts)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorStore<T = f64> {
    pub pairs: BTreeMap<(SegmentId, SegmentId), Vec<(T, T)>>,
    pub global_refs: BTreeMap<SegmentId, Vec<(T, T)>>,
}

impl<T> Default for AnchorStore<T> {
    fn default() -> Self {
        Self { pairs: BTreeMap::new(), global_refs: BTreeMap::new() }
    }
}

impl<T: Scalar> AnchorStore<T> {
    pub fn insert(&mut self, rec: &AnchorRecord<T>) {
        match rec.oriented() {
            Some((key, point)) => self.pairs.entry(key).or_default().push(point),
            None => self.global_refs.entry(rec.receiver).or_default().push((rec.lc_r, rec.lc_s)),
        }
    }

    /// Every segment named by a pair or global anchor.
    pub fn segments(&self) -> BTreeSet<SegmentId> {
        self.pairs
            .keys()
            .flat_map(|&(i, j)| [i, j])
            .chain(self.global_refs.keys().copied())
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty() && self.global_refs.is_empty()
    }
}

/// Partition anchor records into pair and global buckets, preserving
/// record order inside each bucket.
pub fn build_anchor_store<T: Scalar>(records: &[AnchorRecord<T>]) -> AnchorStore<T> {
    let mut store = AnchorStore::default();
    for r in records {
        store.insert(r);
    }
    store
}
