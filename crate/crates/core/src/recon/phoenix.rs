//! Label-correcting search for the lowest-χ route from every segment to
//! global time.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use super::graph::{DroppedFit, FitGraph};
use crate::model::{compose_fit, GlobalFit, SegmentId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueueDiscipline {
    /// Plain FIFO work list.
    #[default]
    Fifo,
    /// Pop the queued segment with the lowest current χ first.
    Priority,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhoenixOptions {
    pub queue: QueueDiscipline,
}

/// One accepted improvement of a segment's global fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Acceptance {
    pub segment: SegmentId,
    pub parent: Option<SegmentId>,
    pub chi: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub dropped_fits: Vec<DroppedFit>,
    pub unreachable: Vec<SegmentId>,
    pub acceptance_log: Vec<Acceptance>,
    /// Candidates rejected because the neighbor already lies on the route.
    pub cycle_rejections: usize,
    pub relaxations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction<T = f64> {
    pub fits: BTreeMap<SegmentId, GlobalFit<T>>,
    pub diagnostics: Diagnostics,
}

impl<T: Scalar> Reconstruction<T> {
    pub fn reachable(&self) -> usize {
        self.fits.values().filter(|f| !f.is_sentinel()).count()
    }
}

struct Keyed<T>(T, u64, usize);

impl<T: Scalar> PartialEq for Keyed<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Scalar> Eq for Keyed<T> {}
impl<T: Scalar> PartialOrd for Keyed<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Keyed<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .partial_cmp(&other.0)
            .unwrap_or(Ordering::Equal)
            .then(self.1.cmp(&other.1))
    }
}

enum WorkList<T> {
    Fifo(VecDeque<usize>),
    Priority(BinaryHeap<Reverse<Keyed<T>>>, u64),
}

impl<T: Scalar> WorkList<T> {
    fn push(&mut self, v: usize, chi: T) {
        match self {
            WorkList::Fifo(q) => q.push_back(v),
            WorkList::Priority(h, seq) => {
                h.push(Reverse(Keyed(chi, *seq, v)));
                *seq += 1;
            }
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            WorkList::Fifo(q) => q.pop_front(),
            WorkList::Priority(h, _) => h.pop().map(|Reverse(Keyed(_, _, v))| v),
        }
    }
}

/// Assign every segment of `graph` a global fit.
///
/// Segments with direct global references are seeded with that fit; the
/// work list then relaxes every edge out of each dequeued segment, keeping
/// a candidate only when its χ is strictly lower than the current one and
/// the neighbor is not already on the candidate's route. Segments with no
/// route keep the sentinel fit.
pub fn phoenix<T: Scalar>(graph: &FitGraph<T>, opts: &PhoenixOptions) -> Reconstruction<T> {
    let ids: Vec<SegmentId> = graph.vertices.iter().copied().collect();
    let index: BTreeMap<SegmentId, usize> = ids.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    let mut adj: Vec<Vec<(usize, _)>> = vec![Vec::new(); ids.len()];
    for (&(i, j), lf) in &graph.edges {
        adj[index[&i]].push((index[&j], lf));
        adj[index[&j]].push((index[&i], lf));
    }
    for list in &mut adj {
        list.sort_by_key(|&(v, _)| v);
    }

    let mut fits: Vec<GlobalFit<T>> = ids.iter().map(|&s| GlobalFit::sentinel(s)).collect();
    let mut queued = vec![false; ids.len()];
    let mut diag = Diagnostics { dropped_fits: graph.dropped.clone(), ..Default::default() };
    let mut work = match opts.queue {
        QueueDiscipline::Fifo => WorkList::Fifo(VecDeque::new()),
        QueueDiscipline::Priority => WorkList::Priority(BinaryHeap::new(), 0),
    };

    for (&g, lf) in &graph.gts_fits {
        let v = index[&g];
        fits[v] = GlobalFit::direct(g, lf);
        diag.acceptance_log.push(Acceptance { segment: g, parent: None, chi: lf.chi.to_f64_lossy() });
        queued[v] = true;
        work.push(v, lf.chi);
    }

    while let Some(qv) = work.pop() {
        if !queued[qv] {
            // stale heap entry
            continue;
        }
        queued[qv] = false;
        let q = ids[qv];
        let gf_q = fits[qv].clone();
        for &(cv, lf) in &adj[qv] {
            let c = ids[cv];
            diag.relaxations += 1;
            if gf_q.ancestors.contains(&c) {
                diag.cycle_rejections += 1;
                continue;
            }
            let Ok(candidate) = compose_fit(&gf_q, lf, q, c) else {
                continue;
            };
            if candidate.chi < fits[cv].chi {
                diag.acceptance_log.push(Acceptance {
                    segment: c,
                    parent: Some(q),
                    chi: candidate.chi.to_f64_lossy(),
                });
                let chi = candidate.chi;
                fits[cv] = candidate;
                if !queued[cv] || matches!(work, WorkList::Priority(..)) {
                    queued[cv] = true;
                    work.push(cv, chi);
                }
            }
        }
    }

    diag.unreachable = ids
        .iter()
        .zip(&fits)
        .filter(|(_, f)| f.is_sentinel())
        .map(|(&s, _)| s)
        .collect();
    Reconstruction { fits: ids.into_iter().zip(fits).collect(), diagnostics: diag }
}
