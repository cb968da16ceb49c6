//! Reconstruction outputs and simulator accounting.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Serialize};

use super::{create, header, open, read_table, seconds_to_us, us_to_seconds, with_path, write_line, FormatError};
use crate::metrics::EvalReport;
use crate::model::{GlobalFit, SegmentId};
use crate::sim::MoteAccounting;

pub const FIT_COLUMNS: &[&str] =
    &["moteid", "rc", "alpha", "beta_s", "chi", "df", "parent_moteid", "parent_rc", "ancestors"];
pub const TIMESTAMP_COLUMNS: &[&str] = &["moteid", "rc", "lc_us", "gts_us"];
pub const ACCOUNTING_COLUMNS: &[&str] = &[
    "mote",
    "segments",
    "alive_s",
    "listen_s",
    "listen_windows",
    "early_exits",
    "beacons",
    "beacon_s",
    "anchors",
    "anchor_bytes",
    "samples",
    "sample_bytes",
];

fn seg_list(s: &BTreeSet<SegmentId>) -> String {
    s.iter().map(|x| format!("{}:{}", x.mote, x.reboot)).collect::<Vec<_>>().join(";")
}

/// Unreconstructed segments have empty `alpha..parent_rc` cells.
pub fn write_fits<W: Write>(mut out: W, fits: &BTreeMap<SegmentId, GlobalFit>) -> Result<(), FormatError> {
    header(&mut out, FIT_COLUMNS)?;
    for (seg, f) in fits {
        let mut row = vec![seg.mote.to_string(), seg.reboot.to_string()];
        if f.is_sentinel() {
            row.extend(std::iter::repeat_n(String::new(), 6));
        } else {
            row.extend([
                f.alpha.to_string(),
                f.beta.to_string(),
                f.chi.to_string(),
                f.df.to_string(),
                f.parent.map(|p| p.mote.to_string()).unwrap_or_default(),
                f.parent.map(|p| p.reboot.to_string()).unwrap_or_default(),
            ]);
        }
        row.push(seg_list(&f.ancestors));
        write_line(&mut out, &row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_fits<R: Read>(input: R) -> Result<BTreeMap<SegmentId, GlobalFit>, FormatError> {
    let (_, rows) = read_table(input, &[FIT_COLUMNS])?;
    let mut out = BTreeMap::new();
    for r in &rows {
        let seg = SegmentId::new(r.parse(0, "moteid")?, r.parse(1, "rc")?);
        let mut ancestors = BTreeSet::new();
        for item in r.str(8).split(';').filter(|s| !s.is_empty()) {
            let (m, rc) = item
                .split_once(':')
                .and_then(|(m, rc)| Some((m.parse().ok()?, rc.parse().ok()?)))
                .ok_or_else(|| FormatError::parse(r.line, format!("bad ancestor {item:?}")))?;
            ancestors.insert(SegmentId::new(m, rc));
        }
        let fit = match r.opt::<f64>(2, "alpha")? {
            None => GlobalFit { ancestors, ..GlobalFit::sentinel(seg) },
            Some(alpha) => {
                let parent = match (r.opt(6, "parent_moteid")?, r.opt(7, "parent_rc")?) {
                    (Some(m), Some(rc)) => Some(SegmentId::new(m, rc)),
                    (None, None) => None,
                    _ => return Err(FormatError::parse(r.line, "parent half-specified")),
                };
                GlobalFit {
                    alpha,
                    beta: r.parse(3, "beta_s")?,
                    parent,
                    ancestors,
                    chi: r.parse(4, "chi")?,
                    df: r.parse(5, "df")?,
                }
            }
        };
        out.insert(seg, fit);
    }
    Ok(out)
}

/// One row per sample; `gts_us` is empty for samples that were lost.
pub fn write_timestamps<W: Write>(
    mut out: W,
    samples: &[(SegmentId, f64)],
    gts: &[Option<f64>],
) -> Result<(), FormatError> {
    header(&mut out, TIMESTAMP_COLUMNS)?;
    for ((seg, lc), g) in samples.iter().zip(gts) {
        write_line(
            &mut out,
            &[
                seg.mote.to_string(),
                seg.reboot.to_string(),
                seconds_to_us(*lc).to_string(),
                g.map(|v| seconds_to_us(v).to_string()).unwrap_or_default(),
            ],
        )?;
    }
    out.flush()?;
    Ok(())
}

/// A row of the timestamps table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimestampRow {
    pub segment: SegmentId,
    pub lc: f64,
    pub gts: Option<f64>,
}

pub fn read_timestamps<R: Read>(input: R) -> Result<Vec<TimestampRow>, FormatError> {
    let (_, rows) = read_table(input, &[TIMESTAMP_COLUMNS])?;
    rows.iter()
        .map(|r| {
            let gts = r.opt::<i64>(3, "gts_us")?.map(us_to_seconds);
            Ok(TimestampRow {
                segment: SegmentId::new(r.parse(0, "moteid")?, r.parse(1, "rc")?),
                lc: us_to_seconds(r.clock(2, "lc_us")?),
                gts,
            })
        })
        .collect()
}

pub const REPORT_COLUMNS: &[&str] = &[
    "data_loss_pct",
    "lost",
    "total",
    "ppm_count",
    "ppm_mean",
    "ppm_median",
    "ppm_p99",
    "ppm_max",
    "zero_elapsed",
    "alpha_med_ppm",
    "alpha_std_ppm",
    "beta_med_s",
    "beta_std_s",
    "reconstructed_segments",
    "space_overhead_pct",
    "duty_cycle_pct",
    "beacon_duty_cycle_pct",
];

/// One flat row per report, without the per-sample errors.
pub fn write_report_csv<W: Write>(mut out: W, r: &EvalReport) -> Result<(), FormatError> {
    header(&mut out, REPORT_COLUMNS)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    write_line(
        &mut out,
        &[
            r.data_loss_pct.to_string(),
            r.lost.to_string(),
            r.total.to_string(),
            r.ppm.count.to_string(),
            r.ppm.mean.to_string(),
            r.ppm.median.to_string(),
            r.ppm.p99.to_string(),
            r.ppm.max.to_string(),
            r.zero_elapsed.to_string(),
            r.alpha_err_ppm.median.to_string(),
            r.alpha_err_ppm.std.to_string(),
            r.beta_err_s.median.to_string(),
            r.beta_err_s.std.to_string(),
            r.reconstructed_segments.to_string(),
            opt(r.space_overhead_pct),
            opt(r.duty_cycle_pct),
            opt(r.beacon_duty_cycle_pct),
        ],
    )?;
    out.flush()?;
    Ok(())
}

pub fn write_accounting<W: Write>(mut out: W, rows: &[MoteAccounting]) -> Result<(), FormatError> {
    header(&mut out, ACCOUNTING_COLUMNS)?;
    for a in rows {
        write_line(
            &mut out,
            &[
                a.mote.to_string(),
                a.segments.to_string(),
                a.alive_s.to_string(),
                a.listen_s.to_string(),
                a.listen_windows.to_string(),
                a.early_exits.to_string(),
                a.beacons.to_string(),
                a.beacon_s.to_string(),
                a.anchors.to_string(),
                a.anchor_bytes.to_string(),
                a.samples.to_string(),
                a.sample_bytes.to_string(),
            ],
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_accounting<R: Read>(input: R) -> Result<Vec<MoteAccounting>, FormatError> {
    let (_, rows) = read_table(input, &[ACCOUNTING_COLUMNS])?;
    rows.iter()
        .map(|r| {
            Ok(MoteAccounting {
                mote: r.parse(0, "mote")?,
                segments: r.parse(1, "segments")?,
                alive_s: r.parse(2, "alive_s")?,
                listen_s: r.parse(3, "listen_s")?,
                listen_windows: r.parse(4, "listen_windows")?,
                early_exits: r.parse(5, "early_exits")?,
                beacons: r.parse(6, "beacons")?,
                beacon_s: r.parse(7, "beacon_s")?,
                anchors: r.parse(8, "anchors")?,
                anchor_bytes: r.parse(9, "anchor_bytes")?,
                samples: r.parse(10, "samples")?,
                sample_bytes: r.parse(11, "sample_bytes")?,
            })
        })
        .collect()
}

pub fn save_fits(path: &Path, fits: &BTreeMap<SegmentId, GlobalFit>) -> Result<(), FormatError> {
    with_path(path, write_fits(create(path)?, fits))
}

pub fn load_fits(path: &Path) -> Result<BTreeMap<SegmentId, GlobalFit>, FormatError> {
    with_path(path, read_fits(open(path)?))
}

pub fn save_timestamps(path: &Path, samples: &[(SegmentId, f64)], gts: &[Option<f64>]) -> Result<(), FormatError> {
    with_path(path, write_timestamps(create(path)?, samples, gts))
}

pub fn load_timestamps(path: &Path) -> Result<Vec<TimestampRow>, FormatError> {
    with_path(path, read_timestamps(open(path)?))
}

pub fn save_report_csv(path: &Path, r: &EvalReport) -> Result<(), FormatError> {
    with_path(path, write_report_csv(create(path)?, r))
}

pub fn save_accounting(path: &Path, rows: &[MoteAccounting]) -> Result<(), FormatError> {
    with_path(path, write_accounting(create(path)?, rows))
}

pub fn load_accounting(path: &Path) -> Result<Vec<MoteAccounting>, FormatError> {
    with_path(path, read_accounting(open(path)?))
}

/// Pretty JSON with a trailing newline.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })?;
    Ok(serde_json::from_str(&text)?)
}
