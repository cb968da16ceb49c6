//! Direct-fit baseline: each segment is mapped to global time from its own
//! global anchors only.

use std::collections::BTreeMap;

use super::store::AnchorStore;
use crate::model::{fit_llse, GlobalFit, SegmentId};
use crate::scalar::Scalar;

/// Mean slope of every directly fittable (two or more references) segment
/// of each mote. Motes with none map to `None`.
pub fn mote_alpha_hints<T: Scalar>(store: &AnchorStore<T>) -> BTreeMap<u32, Option<T>> {
    let mut acc: BTreeMap<u32, (T, usize)> = BTreeMap::new();
    for s in store.segments() {
        acc.entry(s.mote).or_insert((T::zero(), 0));
    }
    for (seg, refs) in &store.global_refs {
        if let Ok(f) = fit_llse(refs, 2) {
            let e = acc.get_mut(&seg.mote).expect("segment registered above");
            e.0 = e.0 + f.a;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(m, (sum, k))| (m, (k > 0).then(|| sum / T::of_usize(k))))
        .collect()
}

/// Segments with at least two global anchors get their least-squares fit;
/// segments with exactly one get the mote's hinted slope and an intercept
/// through that anchor; everything else stays unreconstructed.
pub fn rgtr_baseline<T: Scalar>(
    store: &AnchorStore<T>,
    hints: &BTreeMap<u32, Option<T>>,
) -> BTreeMap<SegmentId, GlobalFit<T>> {
    let mut out: BTreeMap<SegmentId, GlobalFit<T>> =
        store.segments().into_iter().map(|s| (s, GlobalFit::sentinel(s))).collect();
    for (&seg, refs) in &store.global_refs {
        let fit = match refs.as_slice() {
            [] => continue,
            [(lc, gts)] => match hints.get(&seg.mote).copied().flatten() {
                Some(alpha) => GlobalFit {
                    alpha,
                    beta: *gts - alpha * *lc,
                    chi: T::zero(),
                    df: 0,
                    ..GlobalFit::sentinel(seg)
                },
                None => continue,
            },
            _ => match fit_llse(refs, 2) {
                Ok(f) => GlobalFit::direct(seg, &f),
                Err(_) => continue,
            },
        };
        out.insert(seg, fit);
    }
    out
}

/// Baseline with hints derived from the same store.
pub fn rgtr<T: Scalar>(store: &AnchorStore<T>) -> BTreeMap<SegmentId, GlobalFit<T>> {
    rgtr_baseline(store, &mote_alpha_hints(store))
}
