// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DAY: f64 = 86_400.0;
pub const HOUR: f64 = 3_600.0;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

/// Slot replacement rule used when a mote has room for a new neighbor segment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EvictionPolicy {
    /// First segment heard while a vacancy exists.
    #[default]
    Fcfs,
    /// Uniformly random among segments heard this window.
    Rand,
    /// Heard segment with the highest local clock.
    Llc,
}

impl EvictionPolicy {
    pub fn name(self) -> &'static str {
        match self {
            EvictionPolicy::Fcfs => "FCFS",
            EvictionPolicy::Rand => "RAND",
            EvictionPolicy::Llc => "LLC",
        }
    }
}

impl std::str::FromStr for EvictionPolicy {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "FCFS" => Ok(Self::Fcfs),
            "RAND" => Ok(Self::Rand),
            "LLC" => Ok(Self::Llc),
            _ => invalid(format!("unknown eviction policy {s:?}")),
        }
    }
}

/// Distribution of the time between reboots.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentModel {
    /// Log-normal with the given median (seconds) and log-space sigma.
    LogNormal { median_s: f64, sigma: f64 },
    Fixed { length_s: f64 },
    /// Motes never reboot.
    Never,
    /// Inverse-CDF sampling from `(length_s, cumulative probability)` points,
    /// linearly interpolated. Loaded from `path`.
    Empirical { path: PathBuf, points: Vec<(f64, f64)> },
}

impl Default for SegmentModel {
    fn default() -> Self {
        SegmentModel::LogNormal { median_s: 4.0 * DAY, sigma: 1.0 }
    }
}

impl SegmentModel {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SegmentModel::LogNormal { median_s, sigma } => LogNormal::new(median_s.ln(), *sigma)
                .expect("validated lognormal parameters")
                .sample(rng),
            SegmentModel::Fixed { length_s } => *length_s,
            SegmentModel::Never => f64::INFINITY,
            SegmentModel::Empirical { points, .. } => {
                let u: f64 = rng.random();
                inverse_cdf(points, u)
            }
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        match self {
            SegmentModel::LogNormal { median_s, sigma } => {
                if !(*median_s > 0.0 && median_s.is_finite() && *sigma >= 0.0 && sigma.is_finite()) {
                    return invalid("lognormal segment model needs median > 0 and sigma >= 0");
                }
            }
            SegmentModel::Fixed { length_s } => {
                if !(*length_s > 0.0) {
                    return invalid("fixed segment length must be positive");
                }
            }
            SegmentModel::Never => {}
            SegmentModel::Empirical { points, .. } => {
                if points.is_empty() {
                    return invalid("empirical segment model has no points");
                }
                let ok = points.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1)
                    && points.iter().all(|p| p.0 > 0.0 && (0.0..=1.0).contains(&p.1))
                    && points.last().map(|p| p.1) == Some(1.0);
                if !ok {
                    return invalid("empirical CDF must be non-decreasing, positive, and end at 1");
                }
            }
        }
        Ok(())
    }
}

fn inverse_cdf(points: &[(f64, f64)], u: f64) -> f64 {
    let idx = points.partition_point(|p| p.1 < u);
    if idx == 0 {
        return points[0].0;
    }
    if idx >= points.len() {
        return points[points.len() - 1].0;
    }
    let (x0, p0) = points[idx - 1];
    let (x1, p1) = points[idx];
    if p1 == p0 {
        x1
    } else {
        x0 + (x1 - x0) * (u - p0) / (p1 - p0)
    }
}

/// Real-time interval `[start_s, start_s + length_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start_s: f64,
    pub length_s: f64,
}

impl Interval {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start_s && t < self.start_s + self.length_s
    }
}

/// Window during which global references are corrupted by Normal(mu, sigma).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fault {
    pub window: Interval,
    pub mu_s: f64,
    pub sigma_s: f64,
}

/// Log-distance path loss with per-packet Gaussian shadowing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLoss {
    pub pr_d0_dbm: f64,
    pub eta: f64,
    pub sigma_db: f64,
    pub d0_m: f64,
    /// A packet is received iff its received power exceeds this.
    pub sensitivity_dbm: f64,
}

impl Default for PathLoss {
    #[allow(clippy::approx_constant)] // measured shadowing σ, not τ
    fn default() -> Self {
        Self { pr_d0_dbm: -59.28, eta: 2.04, sigma_db: 6.28, d0_m: 2.0, sensitivity_dbm: -94.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub duration_s: f64,
    pub sample_interval_s: f64,
    pub sample_bytes: u64,
    pub t_beacon_s: f64,
    pub t_wakeup_s: f64,
    pub t_listen_s: f64,
    pub t_sync_s: f64,
    pub skew_ppm_range: (f64, f64),
    pub p_down: f64,
    pub downtime_range_s: (f64, f64),
    pub comm_delay_range_ms: (f64, f64),
    pub path_loss: PathLoss,
    /// Links whose mean reception ratio is below this are not simulated.
    pub prr_cutoff: f64,
    /// Replace the path-loss model with a constant reception ratio.
    pub prr_override: Option<f64>,
    pub numseg: usize,
    pub eviction_policy: EvictionPolicy,
    pub eviction_timeout_factor: f64,
    pub gps_outage: Option<Interval>,
    pub gps_fault: Option<Fault>,
    pub anchor_record_bytes: u64,
    pub beacon_airtime_s: f64,
    /// Interval at which a basestation logs a global anchor for every live
    /// mote. These are not stored on motes and only feed the baseline.
    pub basestation_interval_s: Option<f64>,
    pub basestation_outage: Option<Interval>,
    /// Round every clock reading to whole microseconds, as stored on disk.
    pub quantize_us: bool,
    pub seed: u64,
    pub segment_model: SegmentModel,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            duration_s: 365.0 * DAY,
            sample_interval_s: 600.0,
            sample_bytes: 26,
            t_beacon_s: 30.0,
            t_wakeup_s: 6.0 * HOUR,
            t_listen_s: 30.0,
            t_sync_s: 6.0 * HOUR,
            skew_ppm_range: (40.0, 70.0),
            p_down: 0.2,
            downtime_range_s: (0.0, 4.0 * HOUR),
            comm_delay_range_ms: (5.0, 15.0),
            path_loss: PathLoss::default(),
            prr_cutoff: 0.01,
            prr_override: None,
            numseg: 4,
            eviction_policy: EvictionPolicy::Fcfs,
            eviction_timeout_factor: 3.0,
            gps_outage: None,
            gps_fault: None,
            anchor_record_bytes: 16,
            beacon_airtime_s: 0.0225,
            basestation_interval_s: None,
            basestation_outage: None,
            quantize_us: true,
            seed: 1,
            segment_model: SegmentModel::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("duration_s", self.duration_s),
            ("sample_interval_s", self.sample_interval_s),
            ("t_beacon_s", self.t_beacon_s),
            ("t_wakeup_s", self.t_wakeup_s),
            ("t_listen_s", self.t_listen_s),
            ("t_sync_s", self.t_sync_s),
            ("eviction_timeout_factor", self.eviction_timeout_factor),
            ("d0_m", self.path_loss.d0_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive and finite, got {v}"));
            }
        }
        let ordered = [
            ("skew_ppm_range", self.skew_ppm_range),
            ("downtime_range_s", self.downtime_range_s),
            ("comm_delay_range_ms", self.comm_delay_range_ms),
        ];
        for (name, (lo, hi)) in ordered {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return invalid(format!("{name} must be an ordered finite range, got ({lo}, {hi})"));
            }
        }
        if self.downtime_range_s.0 < 0.0 || self.comm_delay_range_ms.0 < 0.0 {
            return invalid("downtime and delay ranges must be non-negative");
        }
        if self.skew_ppm_range.0 <= -1e6 {
            return invalid("skew must keep clocks running forward");
        }
        if !(0.0..=1.0).contains(&self.p_down) || !(0.0..=1.0).contains(&self.prr_cutoff) {
            return invalid("probabilities must lie in [0, 1]");
        }
        if let Some(p) = self.prr_override {
            if !(0.0..=1.0).contains(&p) {
                return invalid("prr_override must lie in [0, 1]");
            }
        }
        if self.numseg == 0 {
            return invalid("numseg must be at least 1");
        }
        if !(self.path_loss.sigma_db >= 0.0) {
            return invalid("sigma_db must be non-negative");
        }
        if !(self.beacon_airtime_s >= 0.0) {
            return invalid("beacon_airtime_s must be non-negative");
        }
        if let Some(b) = self.basestation_interval_s {
            if !(b > 0.0) {
                return invalid("basestation_interval_s must be positive");
            }
        }
        for w in [self.gps_outage, self.basestation_outage, self.gps_fault.map(|f| f.window)]
            .into_iter()
            .flatten()
        {
            if !(w.start_s >= 0.0 && w.length_s >= 0.0) {
                return invalid("outage and fault windows need non-negative start and length");
            }
        }
        if let Some(f) = self.gps_fault {
            if !(f.sigma_s >= 0.0 && f.mu_s.is_finite()) {
                return invalid("fault sigma must be non-negative");
            }
        }
        self.segment_model.validate()
    }
}
