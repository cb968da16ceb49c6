use std::io::{Read, Write};
use std::path::Path;

use super::{create, header, open, read_table, seconds_to_us, us_to_seconds, with_path, write_line, FormatError};
use crate::model::SegmentId;

pub const COLUMNS: &[&str] = &["moteid", "rc", "lc_us", "payload_bytes"];
pub const COLUMNS_WITH_TRUTH: &[&str] = &["moteid", "rc", "lc_us", "payload_bytes", "true_gts_us"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRow {
    pub segment: SegmentId,
    pub lc: f64,
    pub payload_bytes: u32,
    /// Only present in simulator truth files.
    pub true_gts: Option<f64>,
}

/// Reads either schema. Reconstruction code should only look at
/// `segment` and `lc`.
pub fn read_samples<R: Read>(input: R) -> Result<Vec<SampleRow>, FormatError> {
    let (which, rows) = read_table(input, &[COLUMNS, COLUMNS_WITH_TRUTH])?;
    rows.iter()
        .map(|r| {
            Ok(SampleRow {
                segment: SegmentId::new(r.parse(0, "moteid")?, r.parse(1, "rc")?),
                lc: us_to_seconds(r.clock(2, "lc_us")?),
                payload_bytes: r.parse(3, "payload_bytes")?,
                true_gts: if which == 1 { Some(us_to_seconds(r.parse(4, "true_gts_us")?)) } else { None },
            })
        })
        .collect()
}

/// Writes the truth column only when `with_truth` is set; rows lacking a
/// truth value then leave it empty.
pub fn write_samples<W: Write>(mut out: W, rows: &[SampleRow], with_truth: bool) -> Result<(), FormatError> {
    header(&mut out, if with_truth { COLUMNS_WITH_TRUTH } else { COLUMNS })?;
    for s in rows {
        let mut f = vec![
            s.segment.mote.to_string(),
            s.segment.reboot.to_string(),
            seconds_to_us(s.lc).to_string(),
            s.payload_bytes.to_string(),
        ];
        if with_truth {
            f.push(s.true_gts.map(|t| seconds_to_us(t).to_string()).unwrap_or_default());
        }
        write_line(&mut out, &f)?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_samples(path: &Path) -> Result<Vec<SampleRow>, FormatError> {
    with_path(path, read_samples(open(path)?))
}

pub fn save_samples(path: &Path, rows: &[SampleRow], with_truth: bool) -> Result<(), FormatError> {
    with_path(path, write_samples(create(path)?, rows, with_truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_schemas_round_trip() {
        for text in [
            "moteid,rc,lc_us,payload_bytes\n3,1,600000000,26\n3,1,1200000000,26\n",
            "moteid,rc,lc_us,payload_bytes,true_gts_us\n3,1,600000000,26,700123456\n",
        ] {
            let rows = read_samples(text.as_bytes()).unwrap();
            let truth = rows[0].true_gts.is_some();
            let mut buf = Vec::new();
            write_samples(&mut buf, &rows, truth).unwrap();
            assert_eq!(String::from_utf8(buf).unwrap(), text);
        }
    }

    #[test]
    fn stripping_truth_keeps_the_rest() {
        let rows = read_samples("moteid,rc,lc_us,payload_bytes,true_gts_us\n3,1,600000000,26,700123456\n".as_bytes())
            .unwrap();
        let mut buf = Vec::new();
        write_samples(&mut buf, &rows, false).unwrap();
        let stripped = read_samples(buf.as_slice()).unwrap();
        assert_eq!(stripped[0].segment, rows[0].segment);
        assert_eq!(stripped[0].lc, rows[0].lc);
        assert_eq!(stripped[0].true_gts, None);
    }

    #[test]
    fn rejects_unknown_columns() {
        let e = read_samples("moteid,rc,lc_us,payload_bytes,temp\n".as_bytes()).unwrap_err();
        assert!(matches!(e, FormatError::Schema { ref extra, .. } if extra == &["temp"]), "{e}");
    }
}
