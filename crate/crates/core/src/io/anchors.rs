use std::io::{Read, Write};
use std::path::Path;

use super::{create, header, open, read_table, seconds_to_us, us_to_seconds, with_path, write_line, FormatError};
use crate::model::{AnchorRecord, SegmentId};

pub const COLUMNS: &[&str] = &["moteid_r", "rc_r", "lc_r_us", "moteid_s", "rc_s", "lc_s_us"];

pub fn read_anchors<R: Read>(input: R) -> Result<Vec<AnchorRecord>, FormatError> {
    let (_, rows) = read_table(input, &[COLUMNS])?;
    rows.iter()
        .map(|r| {
            Ok(AnchorRecord {
                receiver: SegmentId::new(r.parse(0, "moteid_r")?, r.parse(1, "rc_r")?),
                lc_r: us_to_seconds(r.clock(2, "lc_r_us")?),
                sender: SegmentId::new(r.parse(3, "moteid_s")?, r.parse(4, "rc_s")?),
                lc_s: us_to_seconds(r.clock(5, "lc_s_us")?),
            })
        })
        .collect()
}

pub fn write_anchors<W: Write>(mut out: W, records: &[AnchorRecord]) -> Result<(), FormatError> {
    header(&mut out, COLUMNS)?;
    for a in records {
        write_line(
            &mut out,
            &[
                a.receiver.mote.to_string(),
                a.receiver.reboot.to_string(),
                seconds_to_us(a.lc_r).to_string(),
                a.sender.mote.to_string(),
                a.sender.reboot.to_string(),
                seconds_to_us(a.lc_s).to_string(),
            ],
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_anchors(path: &Path) -> Result<Vec<AnchorRecord>, FormatError> {
    with_path(path, read_anchors(open(path)?))
}

pub fn save_anchors(path: &Path, records: &[AnchorRecord]) -> Result<(), FormatError> {
    with_path(path, write_anchors(create(path)?, records))
}
