use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{create, header, open, read_table, seconds_to_us, us_to_seconds, with_path, write_line, FormatError};
use crate::model::SegmentId;
use crate::sim::SegmentTruth;

pub const COLUMNS: &[&str] = &["moteid", "rc", "boot_us", "end_us", "skew_ppm", "alpha"];

pub fn read_truth<R: Read>(input: R) -> Result<BTreeMap<SegmentId, SegmentTruth>, FormatError> {
    let (_, rows) = read_table(input, &[COLUMNS])?;
    let mut out = BTreeMap::new();
    for r in &rows {
        let segment = SegmentId::new(r.parse(0, "moteid")?, r.parse(1, "rc")?);
        let boot_s = us_to_seconds(r.clock(2, "boot_us")?);
        let t = SegmentTruth {
            segment,
            boot_s,
            end_s: us_to_seconds(r.clock(3, "end_us")?),
            skew_ppm: r.parse(4, "skew_ppm")?,
            alpha: r.parse(5, "alpha")?,
            beta: boot_s,
        };
        if out.insert(segment, t).is_some() {
            return Err(FormatError::parse(r.line, format!("duplicate segment {segment}")));
        }
    }
    Ok(out)
}

pub fn write_truth<W: Write>(mut out: W, truth: &BTreeMap<SegmentId, SegmentTruth>) -> Result<(), FormatError> {
    header(&mut out, COLUMNS)?;
    for t in truth.values() {
        write_line(
            &mut out,
            &[
                t.segment.mote.to_string(),
                t.segment.reboot.to_string(),
                seconds_to_us(t.boot_s).to_string(),
                seconds_to_us(t.end_s).to_string(),
                t.skew_ppm.to_string(),
                t.alpha.to_string(),
            ],
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_truth(path: &Path) -> Result<BTreeMap<SegmentId, SegmentTruth>, FormatError> {
    with_path(path, read_truth(open(path)?))
}

pub fn save_truth(path: &Path, truth: &BTreeMap<SegmentId, SegmentTruth>) -> Result<(), FormatError> {
    with_path(path, write_truth(create(path)?, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "moteid,rc,boot_us,end_us,skew_ppm,alpha\n\
                    0,0,0,86400000000,55.5,0.9999445030802391\n\
                    0,1,86400000001,90000000000,41.123,0.9999588786910794\n";
        let t = read_truth(text.as_bytes()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[&SegmentId::new(0, 1)].beta, 86400.000001);
        let mut buf = Vec::new();
        write_truth(&mut buf, &t).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }
}
