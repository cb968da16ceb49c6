use std::io::{Read, Write};
use std::path::Path;

use super::{create, header, open, read_table, with_path, write_line, FormatError};
use crate::sim::{MotePosition, Topology};

pub const COLUMNS: &[&str] = &["mote_id", "x_m", "y_m", "gps"];

/// Exactly one row must have `gps = 1`.
pub fn read_topology<R: Read>(input: R) -> Result<Topology, FormatError> {
    let (_, rows) = read_table(input, &[COLUMNS])?;
    let mut motes = Vec::with_capacity(rows.len());
    let mut gps = None;
    for r in &rows {
        let id = r.parse(0, "mote_id")?;
        motes.push(MotePosition { id, x_m: r.parse(1, "x_m")?, y_m: r.parse(2, "y_m")? });
        match r.parse::<u8>(3, "gps")? {
            0 => {}
            1 if gps.is_none() => gps = Some(id),
            1 => return Err(FormatError::parse(r.line, "more than one gps mote")),
            _ => return Err(FormatError::parse(r.line, "gps must be 0 or 1")),
        }
    }
    let gps_mote = gps.ok_or_else(|| FormatError::parse(0, "no gps mote"))?;
    let topo = Topology { motes, gps_mote };
    topo.validate().map_err(|e| FormatError::parse(0, e))?;
    Ok(topo)
}

pub fn write_topology<W: Write>(mut out: W, topo: &Topology) -> Result<(), FormatError> {
    header(&mut out, COLUMNS)?;
    for m in &topo.motes {
        write_line(
            &mut out,
            &[
                m.id.to_string(),
                m.x_m.to_string(),
                m.y_m.to_string(),
                u8::from(m.id == topo.gps_mote).to_string(),
            ],
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_topology(path: &Path) -> Result<Topology, FormatError> {
    with_path(path, read_topology(open(path)?))
}

pub fn save_topology(path: &Path, topo: &Topology) -> Result<(), FormatError> {
    with_path(path, write_topology(create(path)?, topo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_topology, TopologyKind};

    #[test]
    fn generated_topology_round_trips() {
        let t = generate_topology(TopologyKind::UniformRandom, 20, 123.4, 9).unwrap();
        let mut buf = Vec::new();
        write_topology(&mut buf, &t).unwrap();
        assert_eq!(read_topology(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn gps_flag_is_checked() {
        assert!(read_topology("mote_id,x_m,y_m,gps\n0,0,0,0\n1,1,1,0\n".as_bytes()).is_err());
        assert!(read_topology("mote_id,x_m,y_m,gps\n0,0,0,1\n1,1,1,1\n".as_bytes()).is_err());
        assert!(read_topology("mote_id,x_m,y_m,gps\n0,0,0,1\n0,1,1,0\n".as_bytes()).is_err());
        let t = read_topology("mote_id,x_m,y_m,gps\n4,0,0,0\n7,1.5,2,1\n".as_bytes()).unwrap();
        assert_eq!(t.gps_mote, 7);
    }
}
