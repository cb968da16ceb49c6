//! Bounded set of neighbor segments a mote stores anchors for.

use rand::Rng;

use super::config::EvictionPolicy;
use crate::model::SegmentId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub segment: SegmentId,
    /// Receiver local time of the last beacon stored for this segment.
    pub last_heard: f64,
}

/// A beacon heard from a segment that is not (yet) tracked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heard {
    pub segment: SegmentId,
    /// Sender's local clock carried by the beacon.
    pub lc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotTable {
    capacity: usize,
    slots: Vec<Slot>,
}

impl SlotTable {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, slots: Vec::new() }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.slots.len() >= self.capacity
    }

    pub fn contains(&self, seg: SegmentId) -> bool {
        self.slots.iter().any(|s| s.segment == seg)
    }

    pub fn segments(&self) -> impl Iterator<Item = SegmentId> + '_ {
        self.slots.iter().map(|s| s.segment)
    }

    pub fn touch(&mut self, seg: SegmentId, now: f64) -> bool {
        match self.slots.iter_mut().find(|s| s.segment == seg) {
            Some(s) => {
                s.last_heard = now;
                true
            }
            None => false,
        }
    }

    /// Drop entries not heard for longer than `timeout`. Returns how many went.
    pub fn remove_stale(&mut self, now: f64, timeout: f64) -> usize {
        let before = self.slots.len();
        self.slots.retain(|s| now - s.last_heard <= timeout);
        before - self.slots.len()
    }

    fn admit(&mut self, seg: SegmentId, now: f64) {
        debug_assert!(!self.is_full() && !self.contains(seg));
        self.slots.push(Slot { segment: seg, last_heard: now });
    }
}

/// Fill vacancies from `heard` according to `policy`.
///
/// Stale entries are dropped first. Candidates already tracked are ignored;
/// when the table is full nothing changes. Returns the admitted segments in
/// admission order.
pub fn eviction_select<R: Rng + ?Sized>(
    table: &mut SlotTable,
    heard: &[Heard],
    policy: EvictionPolicy,
    now: f64,
    timeout: f64,
    rng: &mut R,
) -> Vec<SegmentId> {
    table.remove_stale(now, timeout);

    // Distinct untracked candidates in first-heard order, keeping the
    // highest clock seen for each.
    let mut cands: Vec<Heard> = Vec::new();
    for h in heard {
        if table.contains(h.segment) {
            continue;
        }
        match cands.iter_mut().find(|c| c.segment == h.segment) {
            Some(c) => c.lc = c.lc.max(h.lc),
            None => cands.push(*h),
        }
    }

    let mut admitted = Vec::new();
    while !table.is_full() && !cands.is_empty() {
        let pick = match policy {
            EvictionPolicy::Fcfs => 0,
            EvictionPolicy::Rand => rng.random_range(0..cands.len()),
            EvictionPolicy::Llc => cands
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.lc.total_cmp(&b.1.lc).then(b.1.segment.cmp(&a.1.segment)))
                .map(|(i, _)| i)
                .expect("non-empty"),
        };
        let c = cands.remove(pick);
        table.admit(c.segment, now);
        admitted.push(c.segment);
    }
    admitted
}
