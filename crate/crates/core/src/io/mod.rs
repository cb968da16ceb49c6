//! On-disk formats.
//!
//! All tables are UTF-8, comma-separated, with a header row naming the
//! columns exactly and `\n` line endings (`\r\n` is accepted on input).
//! Clock readings are integer microseconds; in memory they are `f64`
//! seconds, converted with round-half-even. Non-clock reals (slopes,
//! skews, χ) are written in Rust's shortest round-trip decimal form, so
//! every file reads back to the same bits.
//!
//! | file | columns |
//! |------|---------|
//! | anchors | `moteid_r,rc_r,lc_r_us,moteid_s,rc_s,lc_s_us` |
//! | samples | `moteid,rc,lc_us,payload_bytes[,true_gts_us]` |
//! | truth | `moteid,rc,boot_us,end_us,skew_ppm,alpha` |
//! | topology | `mote_id,x_m,y_m,gps` |
//! | fits | `moteid,rc,alpha,beta_s,chi,df,parent_moteid,parent_rc,ancestors` |
//! | timestamps | `moteid,rc,lc_us,gts_us` |
//!
//! The simulation config is a flat `key = value` file, see [`config`].

pub mod anchors;
pub mod config;
pub mod results;
pub mod samples;
pub mod topology;
pub mod truth;

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("header mismatch: missing columns {missing:?}, unexpected columns {extra:?}")]
    Schema { missing: Vec<String>, extra: Vec<String> },
    #[error("line {line}: {field} must not be negative")]
    Range { line: u64, field: String },
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl FormatError {
    pub fn parse(line: u64, msg: impl Into<String>) -> Self {
        FormatError::Parse { line, msg: msg.into() }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, FormatError::Io { .. })
    }
}

impl From<std::io::Error> for FormatError {
    fn from(source: std::io::Error) -> Self {
        FormatError::Io { path: PathBuf::new(), source }
    }
}

/// Seconds to whole microseconds, ties to even.
pub fn seconds_to_us(s: f64) -> i64 {
    (s * 1e6).round_ties_even() as i64
}

pub fn us_to_seconds(us: i64) -> f64 {
    us as f64 / 1e6
}

/// Round to the nearest representable microsecond.
pub fn quantize_s(s: f64) -> f64 {
    us_to_seconds(seconds_to_us(s))
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>, FormatError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>, FormatError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn with_path<T>(path: &Path, r: Result<T, FormatError>) -> Result<T, FormatError> {
    r.map_err(|e| match e {
        FormatError::Io { path: p, source } if p.as_os_str().is_empty() => {
            FormatError::Io { path: path.to_path_buf(), source }
        }
        other => other,
    })
}

/// A parsed data row with its 1-based file line.
pub(crate) struct Row {
    pub line: u64,
    pub fields: Vec<String>,
}

impl Row {
    pub fn str(&self, i: usize) -> &str {
        self.fields[i].as_str()
    }

    pub fn parse<T: std::str::FromStr>(&self, i: usize, name: &str) -> Result<T, FormatError> {
        self.str(i)
            .trim()
            .parse()
            .map_err(|_| FormatError::parse(self.line, format!("bad {name} value {:?}", self.str(i))))
    }

    /// Microsecond clock column that must not be negative.
    pub fn clock(&self, i: usize, name: &str) -> Result<i64, FormatError> {
        let v: i64 = self.parse(i, name)?;
        if v < 0 {
            return Err(FormatError::Range { line: self.line, field: name.to_string() });
        }
        Ok(v)
    }

    pub fn opt<T: std::str::FromStr>(&self, i: usize, name: &str) -> Result<Option<T>, FormatError> {
        if self.str(i).trim().is_empty() {
            Ok(None)
        } else {
            self.parse(i, name).map(Some)
        }
    }
}

/// Read a table whose header must equal one of `schemas`. Returns the index
/// of the matching schema and the rows.
pub(crate) fn read_table<R: Read>(input: R, schemas: &[&[&str]]) -> Result<(usize, Vec<Row>), FormatError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(input);
    let header = rdr.headers().map_err(|e| csv_err(e, 1))?.clone();
    let got: Vec<&str> = header.iter().collect();
    let which = schemas.iter().position(|s| *s == got.as_slice()).ok_or_else(|| {
        let want = schemas[0];
        FormatError::Schema {
            missing: want.iter().filter(|c| !got.contains(c)).map(|c| c.to_string()).collect(),
            extra: got.iter().filter(|c| !schemas.iter().any(|s| s.contains(c))).map(|c| c.to_string()).collect(),
        }
    })?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(e, 0))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        rows.push(Row { line, fields: rec.iter().map(str::to_string).collect() });
    }
    Ok((which, rows))
}

fn csv_err(e: csv::Error, fallback_line: u64) -> FormatError {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => FormatError::Io { path: PathBuf::new(), source },
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            FormatError::parse(line, format!("expected {expected_len} fields, found {len}"))
        }
        other => FormatError::parse(line, format!("{other:?}")),
    }
}

pub(crate) fn write_line<W: Write>(out: &mut W, fields: &[String]) -> Result<(), FormatError> {
    out.write_all(fields.join(",").as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}

pub(crate) fn header<W: Write>(out: &mut W, cols: &[&str]) -> Result<(), FormatError> {
    out.write_all(cols.join(",").as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}
