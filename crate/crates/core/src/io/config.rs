//! Flat `key = value` simulation config.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Keys are
//! the [`SimConfig`] field names (path-loss fields flattened); omitted keys
//! keep their defaults; unknown or repeated keys are errors. Values:
//!
//! * reals and integers in plain decimal, booleans as `true`/`false`;
//! * ranges as `lo,hi`;
//! * optional values as `none`;
//! * windows as `start_s,length_s`, faults as `start_s,length_s,mu_s,sigma_s`;
//! * `segment_model` as `lognormal:<median_s>:<sigma>`, `fixed:<length_s>`,
//!   `never` or `empirical:<path>`, where the path names a table
//!   `length_s,cdf` (relative paths resolve against the config's directory).

use std::path::{Path, PathBuf};

use super::{open, read_table, FormatError};
use crate::sim::{EvictionPolicy, Fault, Interval, SegmentModel, SimConfig};

pub const KEYS: &[&str] = &[
    "duration_s",
    "sample_interval_s",
    "sample_bytes",
    "t_beacon_s",
    "t_wakeup_s",
    "t_listen_s",
    "t_sync_s",
    "skew_ppm_range",
    "p_down",
    "downtime_range_s",
    "comm_delay_range_ms",
    "pr_d0_dbm",
    "path_loss_eta",
    "sigma_db",
    "d0_m",
    "sensitivity_dbm",
    "prr_cutoff",
    "prr_override",
    "numseg",
    "eviction_policy",
    "eviction_timeout_factor",
    "gps_outage",
    "gps_fault",
    "anchor_record_bytes",
    "beacon_airtime_s",
    "basestation_interval_s",
    "basestation_outage",
    "quantize_us",
    "seed",
    "segment_model",
];

fn pair(v: (f64, f64)) -> String {
    format!("{},{}", v.0, v.1)
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_else(|| "none".into())
}

fn interval(w: Interval) -> String {
    format!("{},{}", w.start_s, w.length_s)
}

fn segment_model(m: &SegmentModel) -> String {
    match m {
        SegmentModel::LogNormal { median_s, sigma } => format!("lognormal:{median_s}:{sigma}"),
        SegmentModel::Fixed { length_s } => format!("fixed:{length_s}"),
        SegmentModel::Never => "never".into(),
        SegmentModel::Empirical { path, .. } => format!("empirical:{}", path.display()),
    }
}

/// `(key, value)` for every key, in [`KEYS`] order.
pub fn config_pairs(c: &SimConfig) -> Vec<(&'static str, String)> {
    let values = [
        c.duration_s.to_string(),
        c.sample_interval_s.to_string(),
        c.sample_bytes.to_string(),
        c.t_beacon_s.to_string(),
        c.t_wakeup_s.to_string(),
        c.t_listen_s.to_string(),
        c.t_sync_s.to_string(),
        pair(c.skew_ppm_range),
        c.p_down.to_string(),
        pair(c.downtime_range_s),
        pair(c.comm_delay_range_ms),
        c.path_loss.pr_d0_dbm.to_string(),
        c.path_loss.eta.to_string(),
        c.path_loss.sigma_db.to_string(),
        c.path_loss.d0_m.to_string(),
        c.path_loss.sensitivity_dbm.to_string(),
        c.prr_cutoff.to_string(),
        opt(c.prr_override, |v| v.to_string()),
        c.numseg.to_string(),
        c.eviction_policy.name().to_string(),
        c.eviction_timeout_factor.to_string(),
        opt(c.gps_outage, interval),
        opt(c.gps_fault, |f| format!("{},{},{}", interval(f.window), f.mu_s, f.sigma_s)),
        c.anchor_record_bytes.to_string(),
        c.beacon_airtime_s.to_string(),
        opt(c.basestation_interval_s, |v| v.to_string()),
        opt(c.basestation_outage, interval),
        c.quantize_us.to_string(),
        c.seed.to_string(),
        segment_model(&c.segment_model),
    ];
    KEYS.iter().copied().zip(values).collect()
}

pub fn format_config(c: &SimConfig) -> String {
    let mut s = String::from("# simulation config\n");
    for (k, v) in config_pairs(c) {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(&v);
        s.push('\n');
    }
    s
}

fn reals(line: u64, key: &str, v: &str, n: usize) -> Result<Vec<f64>, FormatError> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(FormatError::parse(line, format!("{key} needs {n} comma-separated values")));
    }
    parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| FormatError::parse(line, format!("bad number {p:?} for {key}"))))
        .collect()
}

fn scalar<T: std::str::FromStr>(line: u64, key: &str, v: &str) -> Result<T, FormatError> {
    v.parse().map_err(|_| FormatError::parse(line, format!("bad value {v:?} for {key}")))
}

fn optional<T>(v: &str, f: impl FnOnce(&str) -> Result<T, FormatError>) -> Result<Option<T>, FormatError> {
    if v.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        f(v).map(Some)
    }
}

fn parse_window(line: u64, key: &str, v: &str) -> Result<Interval, FormatError> {
    let r = reals(line, key, v, 2)?;
    Ok(Interval { start_s: r[0], length_s: r[1] })
}

fn parse_segment_model(line: u64, v: &str, base: Option<&Path>) -> Result<SegmentModel, FormatError> {
    let mut parts = v.splitn(3, ':');
    let kind = parts.next().unwrap_or_default();
    let bad = || FormatError::parse(line, format!("bad segment_model {v:?}"));
    let num = |s: Option<&str>| s.and_then(|s| s.trim().parse::<f64>().ok()).ok_or_else(bad);
    match kind {
        "lognormal" => Ok(SegmentModel::LogNormal { median_s: num(parts.next())?, sigma: num(parts.next())? }),
        "fixed" => Ok(SegmentModel::Fixed { length_s: num(parts.next())? }),
        "never" => Ok(SegmentModel::Never),
        "empirical" => {
            let rest = v.strip_prefix("empirical:").ok_or_else(bad)?;
            let path = PathBuf::from(rest);
            let resolved = match base {
                Some(b) if path.is_relative() => b.join(&path),
                _ => path.clone(),
            };
            let points = load_cdf(&resolved)?;
            Ok(SegmentModel::Empirical { path, points })
        }
        _ => Err(bad()),
    }
}

/// Read an empirical segment-length CDF table (`length_s,cdf`).
pub fn load_cdf(path: &Path) -> Result<Vec<(f64, f64)>, FormatError> {
    let (_, rows) = super::with_path(path, read_table(open(path)?, &[&["length_s", "cdf"]]))?;
    rows.iter().map(|r| Ok((r.parse(0, "length_s")?, r.parse(1, "cdf")?))).collect()
}

/// Parse config text; `base` resolves relative file references.
pub fn parse_config(text: &str, base: Option<&Path>) -> Result<SimConfig, FormatError> {
    let mut c = SimConfig::default();
    apply_settings(&mut c, text, base)?;
    Ok(c)
}

/// Apply `key = value` lines on top of an existing config.
pub fn apply_settings(c: &mut SimConfig, text: &str, base: Option<&Path>) -> Result<(), FormatError> {
    let mut seen = std::collections::BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let body = raw.split('#').next().unwrap_or_default().trim();
        if body.is_empty() {
            continue;
        }
        let (key, v) = body
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| FormatError::parse(line, "expected key = value"))?;
        if !KEYS.contains(&key) {
            return Err(FormatError::parse(line, format!("unknown key {key:?}")));
        }
        if !seen.insert(key.to_string()) {
            return Err(FormatError::parse(line, format!("repeated key {key:?}")));
        }
        let pair = |v: &str| reals(line, key, v, 2).map(|r| (r[0], r[1]));
        match key {
            "duration_s" => c.duration_s = scalar(line, key, v)?,
            "sample_interval_s" => c.sample_interval_s = scalar(line, key, v)?,
            "sample_bytes" => c.sample_bytes = scalar(line, key, v)?,
            "t_beacon_s" => c.t_beacon_s = scalar(line, key, v)?,
            "t_wakeup_s" => c.t_wakeup_s = scalar(line, key, v)?,
            "t_listen_s" => c.t_listen_s = scalar(line, key, v)?,
            "t_sync_s" => c.t_sync_s = scalar(line, key, v)?,
            "skew_ppm_range" => c.skew_ppm_range = pair(v)?,
            "p_down" => c.p_down = scalar(line, key, v)?,
            "downtime_range_s" => c.downtime_range_s = pair(v)?,
            "comm_delay_range_ms" => c.comm_delay_range_ms = pair(v)?,
            "pr_d0_dbm" => c.path_loss.pr_d0_dbm = scalar(line, key, v)?,
            "path_loss_eta" => c.path_loss.eta = scalar(line, key, v)?,
            "sigma_db" => c.path_loss.sigma_db = scalar(line, key, v)?,
            "d0_m" => c.path_loss.d0_m = scalar(line, key, v)?,
            "sensitivity_dbm" => c.path_loss.sensitivity_dbm = scalar(line, key, v)?,
            "prr_cutoff" => c.prr_cutoff = scalar(line, key, v)?,
            "prr_override" => c.prr_override = optional(v, |v| scalar(line, key, v))?,
            "numseg" => c.numseg = scalar(line, key, v)?,
            "eviction_policy" => {
                c.eviction_policy =
                    v.parse::<EvictionPolicy>().map_err(|e| FormatError::parse(line, e.to_string()))?
            }
            "eviction_timeout_factor" => c.eviction_timeout_factor = scalar(line, key, v)?,
            "gps_outage" => c.gps_outage = optional(v, |v| parse_window(line, key, v))?,
            "gps_fault" => {
                c.gps_fault = optional(v, |v| {
                    let r = reals(line, key, v, 4)?;
                    Ok(Fault { window: Interval { start_s: r[0], length_s: r[1] }, mu_s: r[2], sigma_s: r[3] })
                })?
            }
            "anchor_record_bytes" => c.anchor_record_bytes = scalar(line, key, v)?,
            "beacon_airtime_s" => c.beacon_airtime_s = scalar(line, key, v)?,
            "basestation_interval_s" => c.basestation_interval_s = optional(v, |v| scalar(line, key, v))?,
            "basestation_outage" => c.basestation_outage = optional(v, |v| parse_window(line, key, v))?,
            "quantize_us" => c.quantize_us = scalar(line, key, v)?,
            "seed" => c.seed = scalar(line, key, v)?,
            "segment_model" => c.segment_model = parse_segment_model(line, v, base)?,
            _ => unreachable!("key list and match arms agree"),
        }
    }
    Ok(())
}

pub fn load_config(path: &Path) -> Result<SimConfig, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text, path.parent())
}

pub fn save_config(path: &Path, c: &SimConfig) -> Result<(), FormatError> {
    std::fs::write(path, format_config(c)).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}
