//! Clock model: segments, anchor records, local and global fits.
//!
//! A segment's local clock relates to global time through
//! `gts = alpha * lc + beta`. Local fits relate two segments' clocks, and
//! global fits are built by composing local fits along a path that ends at
//! a segment with direct global references.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Identity of one monotonic run of a mote's clock.
///
/// Ordered lexicographically by `(mote, reboot)`; the smaller segment of a
/// pair is always the independent variable of their local fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SegmentId {
    pub mote: u32,
    pub reboot: u32,
}

impl SegmentId {
    pub const fn new(mote: u32, reboot: u32) -> Self {
        Self { mote, reboot }
    }
}

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.mote, self.reboot)
    }
}

/// One observed pair of clock readings.
///
/// When `receiver == sender` the record is a global anchor: `lc_r` is the
/// local clock and `lc_s` is global time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorRecord<T = f64> {
    pub receiver: SegmentId,
    pub lc_r: T,
    pub sender: SegmentId,
    pub lc_s: T,
}

impl<T: Scalar> AnchorRecord<T> {
    pub fn pair(receiver: SegmentId, lc_r: T, sender: SegmentId, lc_s: T) -> Self {
        Self { receiver, lc_r, sender, lc_s }
    }

    pub fn global(segment: SegmentId, lc: T, gts: T) -> Self {
        Self { receiver: segment, lc_r: lc, sender: segment, lc_s: gts }
    }

    pub fn is_global(&self) -> bool {
        self.receiver == self.sender
    }

    /// Canonical `(smaller, larger)` pair and the point `(x, y)` with `x` on
    /// the smaller segment's clock. `None` for global anchors.
    pub fn oriented(&self) -> Option<((SegmentId, SegmentId), (T, T))> {
        use std::cmp::Ordering::*;
        match self.receiver.cmp(&self.sender) {
            Equal => None,
            Less => Some(((self.receiver, self.sender), (self.lc_r, self.lc_s))),
            Greater => Some(((self.sender, self.receiver), (self.lc_s, self.lc_r))),
        }
    }

    pub fn cast<U: Scalar>(&self) -> AnchorRecord<U> {
        AnchorRecord {
            receiver: self.receiver,
            lc_r: U::of(self.lc_r.to_f64_lossy()),
            sender: self.sender,
            lc_s: U::of(self.lc_s.to_f64_lossy()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("need at least {min} points to fit, got {n}")]
    InsufficientPoints { n: usize, min: usize },
    #[error("independent variable has zero variance")]
    DegenerateX,
    #[error("local fit slope is zero")]
    ZeroSlope,
    #[error("both fits have zero degrees of freedom")]
    ZeroDegreesOfFreedom,
    #[error("segment has no global fit")]
    SentinelFit,
}

/// Least-squares line `y = a * x + b` between two clocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFit<T = f64> {
    pub a: T,
    pub b: T,
    /// Unbiased residual variance, RSS / (n - 2). Zero when `df == 0`.
    pub chi: T,
    pub df: usize,
    pub n: usize,
}

impl<T: Scalar> LocalFit<T> {
    pub fn predict(&self, x: T) -> T {
        self.a * x + self.b
    }
}

/// Default minimum number of points for a usable edge (gives `df >= 1`).
pub const DEFAULT_MIN_FIT_POINTS: usize = 3;

/// Ordinary least squares of `y` on `x`.
///
/// Errors when fewer than `min_points` points are given (never fewer than
/// two) or when all `x` coincide.
pub fn fit_llse<T: Scalar>(points: &[(T, T)], min_points: usize) -> Result<LocalFit<T>, ModelError> {
    let n = points.len();
    let min = min_points.max(2);
    if n < min {
        return Err(ModelError::InsufficientPoints { n, min });
    }
    let nt = T::of_usize(n);

    // Two-pass means; the correction pass removes most of the rounding of the
    // first sum when the clocks carry a large common offset.
    let mut xm = points.iter().fold(T::zero(), |s, p| s + p.0) / nt;
    let mut ym = points.iter().fold(T::zero(), |s, p| s + p.1) / nt;
    xm = xm + points.iter().fold(T::zero(), |s, p| s + (p.0 - xm)) / nt;
    ym = ym + points.iter().fold(T::zero(), |s, p| s + (p.1 - ym)) / nt;

    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for &(x, y) in points {
        let dx = x - xm;
        sxx = dx.mul_add(dx, sxx);
        sxy = dx.mul_add(y - ym, sxy);
    }
    if sxx == T::zero() {
        return Err(ModelError::DegenerateX);
    }
    let a = sxy / sxx;
    let b = ym - a * xm;

    // Residuals of the rounded line, each carried to about one ulp of its
    // own size rather than of y. Regressing them on x once more gives the
    // rounding left in (a, b), and removing that projection leaves the RSS
    // of the exact minimizer even when the noise is near the resolution of y.
    let resid: Vec<T> = points.iter().map(|&(x, y)| residual(x, y, a, b)).collect();
    let rm = resid.iter().fold(T::zero(), |s, &r| s + r) / nt;
    let (mut cross, mut sq) = (T::zero(), T::zero());
    for (&(x, _), &r) in points.iter().zip(&resid) {
        cross = (x - xm).mul_add(r - rm, cross);
        sq = r.mul_add(r, sq);
    }
    let da = cross / sxx;
    let (a, b) = (a + da, b + ((-da).mul_add(xm, rm)));
    let rss = (sq - nt * rm * rm - cross * da).max(T::zero());
    let df = n - 2;
    let chi = if df == 0 { T::zero() } else { rss / T::of_usize(df) };
    Ok(LocalFit { a, b, chi, df, n })
}

/// `y - (a*x + b)` using error-free sum and product transforms.
fn residual<T: Scalar>(x: T, y: T, a: T, b: T) -> T {
    let p = a * x;
    let pe = a.mul_add(x, -p);
    let (s, se) = two_sum(y, -p);
    let (t, te) = two_sum(s, -b);
    t + ((se + te) - pe)
}

fn two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Mapping from a segment's local clock to global time, plus the path that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalFit<T = f64> {
    pub alpha: T,
    pub beta: T,
    /// Neighbor this fit was derived through; `None` for direct fits.
    pub parent: Option<SegmentId>,
    /// Every segment on the path from this segment to global time,
    /// this segment included.
    pub ancestors: BTreeSet<SegmentId>,
    pub chi: T,
    pub df: usize,
}

impl<T: Scalar> GlobalFit<T> {
    /// Placeholder for a segment with no known route to global time.
    pub fn sentinel(segment: SegmentId) -> Self {
        Self {
            alpha: T::zero(),
            beta: T::zero(),
            parent: None,
            ancestors: BTreeSet::from([segment]),
            chi: T::chi_max(),
            df: 0,
        }
    }

    /// Direct fit from a segment's own global references (`gts = a*lc + b`).
    pub fn direct(segment: SegmentId, fit: &LocalFit<T>) -> Self {
        Self {
            alpha: fit.a,
            beta: fit.b,
            parent: None,
            ancestors: BTreeSet::from([segment]),
            chi: fit.chi,
            df: fit.df,
        }
    }

    pub fn is_sentinel(&self) -> bool {
        self.chi == T::chi_max()
    }

    pub fn estimate(&self, lc: T) -> Result<T, ModelError> {
        estimate_gts(self, lc)
    }

    pub fn cast<U: Scalar>(&self) -> GlobalFit<U> {
        let c = |v: T| U::of(v.to_f64_lossy());
        GlobalFit {
            alpha: c(self.alpha),
            beta: c(self.beta),
            parent: self.parent,
            ancestors: self.ancestors.clone(),
            chi: if self.is_sentinel() { U::chi_max() } else { c(self.chi) },
            df: self.df,
        }
    }
}

/// Global fit for segment `c` obtained through its neighbor `q`.
///
/// `lf` must be the stored fit for the ordered pair `(min(q, c), max(q, c))`,
/// i.e. it maps the smaller segment's clock onto the larger one's.
pub fn compose_fit<T: Scalar>(
    gf_q: &GlobalFit<T>,
    lf: &LocalFit<T>,
    q: SegmentId,
    c: SegmentId,
) -> Result<GlobalFit<T>, ModelError> {
    if gf_q.is_sentinel() {
        return Err(ModelError::SentinelFit);
    }
    let (alpha, beta) = if q > c {
        // q = a*c + b
        (gf_q.alpha * lf.a, gf_q.alpha.mul_add(lf.b, gf_q.beta))
    } else {
        // c = a*q + b, so q = (c - b) / a
        if lf.a == T::zero() {
            return Err(ModelError::ZeroSlope);
        }
        let alpha = gf_q.alpha / lf.a;
        (alpha, (-alpha).mul_add(lf.b, gf_q.beta))
    };
    let df = gf_q.df + lf.df;
    if df == 0 {
        return Err(ModelError::ZeroDegreesOfFreedom);
    }
    let chi = (T::of_usize(gf_q.df) * gf_q.chi + T::of_usize(lf.df) * lf.chi) / T::of_usize(df);

    let mut ancestors = gf_q.ancestors.clone();
    ancestors.insert(q);
    ancestors.insert(c);
    Ok(GlobalFit { alpha, beta, parent: Some(q), ancestors, chi, df })
}

/// Global timestamp for local time `lc`.
pub fn estimate_gts<T: Scalar>(fit: &GlobalFit<T>, lc: T) -> Result<T, ModelError> {
    if fit.is_sentinel() {
        return Err(ModelError::SentinelFit);
    }
    Ok(fit.alpha.mul_add(lc, fit.beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(alpha: f64, beta: f64, chi: f64, df: usize, seg: SegmentId) -> GlobalFit {
        GlobalFit { alpha, beta, parent: None, ancestors: BTreeSet::from([seg]), chi, df }
    }

    fn lf(a: f64, b: f64, chi: f64, df: usize) -> LocalFit {
        LocalFit { a, b, chi, df, n: df + 2 }
    }

    #[test]
    fn exact_lines() {
        let f = fit_llse(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)], 3).unwrap();
        assert_eq!((f.a, f.b, f.chi, f.df), (2.0, 1.0, 0.0, 1));
        let f = fit_llse(&[(0.0, 5.0), (10.0, 15.0), (20.0, 25.0)], 3).unwrap();
        assert_eq!((f.a, f.b, f.chi, f.df), (1.0, 5.0, 0.0, 1));
    }

    #[test]
    fn fit_errors() {
        assert_eq!(
            fit_llse(&[(0.0, 1.0), (1.0, 2.0)], 3),
            Err(ModelError::InsufficientPoints { n: 2, min: 3 })
        );
        assert_eq!(fit_llse::<f64>(&[], 0), Err(ModelError::InsufficientPoints { n: 0, min: 2 }));
        assert_eq!(fit_llse(&[(4.0, 1.0), (4.0, 2.0), (4.0, 9.0)], 3), Err(ModelError::DegenerateX));
    }

    #[test]
    fn two_point_fit_has_zero_df() {
        let f = fit_llse(&[(0.0, 1000.0), (100.0, 1100.0)], 2).unwrap();
        assert_eq!((f.a, f.b, f.chi, f.df), (1.0, 1000.0, 0.0, 0));
    }

    #[test]
    fn identity_composition() {
        let s = SegmentId::new(1, 0);
        let t = SegmentId::new(2, 0);
        let g = gf(1.0, 0.0, 0.0, 1, s);
        let id = lf(1.0, 0.0, 0.0, 1);
        for (q, c) in [(s, t), (t, s)] {
            let out = compose_fit(&GlobalFit { ancestors: BTreeSet::from([q]), ..g.clone() }, &id, q, c).unwrap();
            assert_eq!((out.alpha, out.beta), (1.0, 0.0));
        }
    }

    #[test]
    fn compose_larger_parent() {
        let q = SegmentId::new(5, 0);
        let c = SegmentId::new(2, 1);
        let out = compose_fit(&gf(2.0, 10.0, 4.0, 2, q), &lf(3.0, 5.0, 1.0, 2), q, c).unwrap();
        assert_eq!(out.alpha, 6.0);
        assert_eq!(out.beta, 20.0);
        assert_eq!(out.chi, 2.5);
        assert_eq!(out.df, 4);
        assert_eq!(out.parent, Some(q));
        assert_eq!(out.ancestors, BTreeSet::from([q, c]));
    }

    #[test]
    fn compose_smaller_parent() {
        let q = SegmentId::new(1, 0);
        let c = SegmentId::new(1, 1);
        let out = compose_fit(&gf(2.0, 10.0, 0.0, 1, q), &lf(4.0, 8.0, 0.0, 1), q, c).unwrap();
        assert_eq!(out.alpha, 0.5);
        assert_eq!(out.beta, 6.0);
    }

    #[test]
    fn compose_rejects_bad_inputs() {
        let q = SegmentId::new(1, 0);
        let c = SegmentId::new(2, 0);
        assert_eq!(
            compose_fit(&gf(1.0, 0.0, 0.0, 1, q), &lf(0.0, 1.0, 0.0, 1), q, c),
            Err(ModelError::ZeroSlope)
        );
        assert_eq!(
            compose_fit(&GlobalFit::sentinel(q), &lf(1.0, 1.0, 0.0, 1), q, c),
            Err(ModelError::SentinelFit)
        );
        assert_eq!(
            compose_fit(&gf(1.0, 0.0, 0.0, 0, q), &lf(1.0, 1.0, 0.0, 0), q, c),
            Err(ModelError::ZeroDegreesOfFreedom)
        );
    }

    #[test]
    fn estimates() {
        let s = SegmentId::new(0, 0);
        assert_eq!(estimate_gts(&gf(1.0, 0.0, 0.0, 1, s), 100.0), Ok(100.0));
        let v = estimate_gts(&gf(1.00005, 10.0, 0.0, 1, s), 20000.0).unwrap();
        assert!((v - 20011.0).abs() < 1e-9);
        assert_eq!(estimate_gts(&GlobalFit::<f64>::sentinel(s), 1.0), Err(ModelError::SentinelFit));
    }

    #[test]
    fn orientation_follows_segment_order() {
        let a = SegmentId::new(1, 0);
        let b = SegmentId::new(1, 1);
        let r1 = AnchorRecord::pair(a, 10.0, b, 20.0);
        let r2 = AnchorRecord::pair(b, 21.0, a, 11.0);
        assert_eq!(r1.oriented(), Some(((a, b), (10.0, 20.0))));
        assert_eq!(r2.oriented(), Some(((a, b), (11.0, 21.0))));
        assert_eq!(AnchorRecord::global(a, 1.0, 2.0).oriented(), None);
    }

    #[test]
    fn segment_order_is_lexicographic() {
        assert!(SegmentId::new(1, 9) < SegmentId::new(2, 0));
        assert!(SegmentId::new(2, 0) < SegmentId::new(2, 1));
    }

    #[test]
    fn works_in_single_precision() {
        let f = fit_llse::<f32>(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0), (3.0, 7.0)], 3).unwrap();
        assert!((f.a - 2.0).abs() < 1e-6 && (f.b - 1.0).abs() < 1e-6);
    }
}
