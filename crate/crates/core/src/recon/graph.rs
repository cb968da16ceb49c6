use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::store::AnchorStore;
use crate::model::{fit_llse, LocalFit, ModelError, SegmentId, DEFAULT_MIN_FIT_POINTS};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitOptions {
    pub min_fit_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { min_fit_points: DEFAULT_MIN_FIT_POINTS }
    }
}

/// A pair or global bucket that did not yield a usable fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedFit {
    pub first: SegmentId,
    /// `None` for a segment's global-reference fit.
    pub second: Option<SegmentId>,
    pub points: usize,
    pub reason: String,
}

/// Segments as vertices, successful local fits as edges.
#[derive(Debug, Clone, PartialEq)]
pub struct FitGraph<T = f64> {
    pub vertices: BTreeSet<SegmentId>,
    /// Keyed by `(smaller, larger)`; each fit maps the smaller clock onto the larger.
    pub edges: BTreeMap<(SegmentId, SegmentId), LocalFit<T>>,
    /// Fits of global time on local time for segments with global anchors.
    pub gts_fits: BTreeMap<SegmentId, LocalFit<T>>,
    pub dropped: Vec<DroppedFit>,
}

impl<T: Scalar> FitGraph<T> {
    pub fn gts_nodes(&self) -> impl Iterator<Item = SegmentId> + '_ {
        self.gts_fits.keys().copied()
    }

    /// Neighbor lists in segment order.
    pub fn adjacency(&self) -> BTreeMap<SegmentId, Vec<SegmentId>> {
        let mut adj: BTreeMap<SegmentId, Vec<SegmentId>> = BTreeMap::new();
        for &(i, j) in self.edges.keys() {
            adj.entry(i).or_default().push(j);
            adj.entry(j).or_default().push(i);
        }
        for list in adj.values_mut() {
            list.sort_unstable();
        }
        adj
    }

    pub fn edge(&self, u: SegmentId, v: SegmentId) -> Option<&LocalFit<T>> {
        self.edges.get(&(u.min(v), u.max(v)))
    }
}

fn dropped(first: SegmentId, second: Option<SegmentId>, points: usize, e: ModelError) -> DroppedFit {
    DroppedFit { first, second, points, reason: e.to_string() }
}

pub fn build_fit_graph<T: Scalar>(store: &AnchorStore<T>, opts: &FitOptions) -> FitGraph<T> {
    let mut g = FitGraph {
        vertices: store.segments(),
        edges: BTreeMap::new(),
        gts_fits: BTreeMap::new(),
        dropped: Vec::new(),
    };
    for (&(i, j), pts) in &store.pairs {
        match fit_llse(pts, opts.min_fit_points) {
            Ok(f) => {
                g.edges.insert((i, j), f);
            }
            Err(e) => g.dropped.push(dropped(i, Some(j), pts.len(), e)),
        }
    }
    for (&s, pts) in &store.global_refs {
        match fit_llse(pts, opts.min_fit_points) {
            Ok(f) => {
                g.gts_fits.insert(s, f);
            }
            Err(e) => g.dropped.push(dropped(s, None, pts.len(), e)),
        }
    }
    g
}
