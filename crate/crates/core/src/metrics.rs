//! Evaluation metrics over a reconstruction and its ground truth.
//!
//! Samples whose segment was not reconstructed count toward data loss only;
//! PPM statistics cover the assigned samples. Standard deviations are
//! population deviations of absolute errors. Aggregates sum over sorted
//! values, so they do not depend on sample order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{GlobalFit, SegmentId};
use crate::recon::DataLossReport;
use crate::sim::{MoteAccounting, SegmentTruth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("elapsed time since segment start is zero")]
    ZeroElapsed,
    #[error("no samples recorded")]
    EmptyTrace,
    #[error("no segment has both an estimate and ground truth")]
    NoOverlap,
}

/// `|assigned - truth| / t_delta * 1e6`.
pub fn ppm_error(assigned: f64, truth: f64, t_delta: f64) -> Result<f64, MetricError> {
    if t_delta <= 0.0 {
        return Err(MetricError::ZeroElapsed);
    }
    Ok((assigned - truth).abs() / t_delta * 1e6)
}

pub fn data_loss(report: &DataLossReport) -> Result<f64, MetricError> {
    if report.total == 0 {
        return Err(MetricError::EmptyTrace);
    }
    Ok(report.lost as f64 / report.total as f64 * 100.0)
}

/// Share of storage spent on anchors, in percent.
pub fn space_overhead(anchor_bytes: u64, sample_bytes: u64) -> f64 {
    let total = anchor_bytes + sample_bytes;
    if total == 0 {
        0.0
    } else {
        anchor_bytes as f64 / total as f64 * 100.0
    }
}

/// Share of time the radio was on, in percent.
pub fn duty_cycle(radio_on_s: f64, elapsed_s: f64) -> f64 {
    if elapsed_s <= 0.0 {
        0.0
    } else {
        (radio_on_s / elapsed_s * 100.0).clamp(0.0, 100.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub p99: f64,
    pub max: f64,
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn median_of_sorted(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// Nearest-rank percentile, `p` in `[0, 1]`.
fn percentile_of_sorted(v: &[f64], p: f64) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let rank = (p * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let v = sorted(values);
        if v.is_empty() {
            return Self::default();
        }
        Self {
            count: v.len(),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: median_of_sorted(&v),
            p99: percentile_of_sorted(&v, 0.99),
            max: v[v.len() - 1],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub median: f64,
    pub std: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Self {
        let v = sorted(values);
        if v.is_empty() {
            return Self::default();
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Self { median: median_of_sorted(&v), std: var.sqrt() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AlphaBetaErrors {
    /// Slope error in ppm.
    pub alpha: Spread,
    /// Intercept error in seconds.
    pub beta: Spread,
    pub segments: usize,
}

/// Per-segment `|α̂ - α| / α` (ppm) and `|β̂ - β|` (s) over every segment
/// with both an estimate and ground truth.
pub fn alpha_beta_errors(
    estimated: &BTreeMap<SegmentId, GlobalFit>,
    truth: &BTreeMap<SegmentId, SegmentTruth>,
) -> Result<AlphaBetaErrors, MetricError> {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (seg, fit) in estimated {
        if fit.is_sentinel() {
            continue;
        }
        if let Some(t) = truth.get(seg) {
            a.push((fit.alpha - t.alpha).abs() / t.alpha * 1e6);
            b.push((fit.beta - t.beta).abs());
        }
    }
    if a.is_empty() {
        return Err(MetricError::NoOverlap);
    }
    Ok(AlphaBetaErrors { alpha: Spread::of(&a), beta: Spread::of(&b), segments: a.len() })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub data_loss_pct: f64,
    pub lost: usize,
    pub total: usize,
    pub ppm: Summary,
    /// Samples at the very start of a segment, excluded from `ppm`.
    pub zero_elapsed: usize,
    pub alpha_err_ppm: Spread,
    pub beta_err_s: Spread,
    pub reconstructed_segments: usize,
    pub space_overhead_pct: Option<f64>,
    pub duty_cycle_pct: Option<f64>,
    /// Duty cycle due to beacon transmissions alone.
    pub beacon_duty_cycle_pct: Option<f64>,
    /// Per assigned sample, in input order.
    pub ppm_errors: Vec<f64>,
}

/// Full evaluation. `accounting` enables the space and duty-cycle figures.
pub fn evaluate(
    fits: &BTreeMap<SegmentId, GlobalFit>,
    samples: &[(SegmentId, f64)],
    truth: &BTreeMap<SegmentId, SegmentTruth>,
    accounting: Option<&MoteAccounting>,
) -> Result<EvalReport, MetricError> {
    let mut lost = 0;
    let mut zero_elapsed = 0;
    let mut ppm_errors = Vec::with_capacity(samples.len());
    for &(seg, lc) in samples {
        let Some(assigned) = fits.get(&seg).and_then(|f| f.estimate(lc).ok()) else {
            lost += 1;
            continue;
        };
        let Some(t) = truth.get(&seg) else {
            continue;
        };
        let true_gts = t.gts(lc);
        match ppm_error(assigned, true_gts, true_gts - t.beta) {
            Ok(e) => ppm_errors.push(e),
            Err(_) => zero_elapsed += 1,
        }
    }
    let loss = DataLossReport { lost, total: samples.len() };
    let ab = alpha_beta_errors(fits, truth).unwrap_or_default();
    Ok(EvalReport {
        data_loss_pct: data_loss(&loss)?,
        lost,
        total: samples.len(),
        ppm: Summary::of(&ppm_errors),
        zero_elapsed,
        alpha_err_ppm: ab.alpha,
        beta_err_s: ab.beta,
        reconstructed_segments: ab.segments,
        space_overhead_pct: accounting.map(|a| space_overhead(a.anchor_bytes, a.sample_bytes)),
        duty_cycle_pct: accounting.map(|a| duty_cycle(a.radio_on_s(), a.alive_s)),
        beacon_duty_cycle_pct: accounting.map(|a| duty_cycle(a.beacon_s, a.alive_s)),
        ppm_errors,
    })
}
