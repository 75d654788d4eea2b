//! FNSV binary field files.
//!
//! Layout (little-endian): magic `FNSV`, u32 version = 1, u8 dimension,
//! u8 components, u16 reserved = 0, one u64 points-per-axis per dimension,
//! f64 box length, then the physical samples as f64 in component-major,
//! x-fastest order. Spectra are never stored; a file always holds the
//! real field.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};

pub const MAGIC: &[u8; 4] = b"FNSV";
pub const VERSION: u32 = 1;

pub fn write_field<W: Write>(mut w: W, field: &Field) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u8(g.dim() as u8)?;
    w.write_u8(u8::try_from(field.components()).map_err(|_| Error::Format("more than 255 components".into()))?)?;
    w.write_u16::<LittleEndian>(0)?;
    for _ in 0..g.dim() {
        w.write_u64::<LittleEndian>(g.n() as u64)?;
    }
    w.write_f64::<LittleEndian>(g.length())?;
    for &v in field.data() {
        w.write_f64::<LittleEndian>(v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<Field> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = r.read_u8()? as usize;
    let comps = r.read_u8()? as usize;
    let reserved = r.read_u16::<LittleEndian>()?;
    if reserved != 0 {
        return Err(Error::Format("reserved field is nonzero".into()));
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::Format(format!("dimension {dim} not in 1..=3")));
    }
    let mut sizes = Vec::with_capacity(dim);
    for _ in 0..dim {
        sizes.push(r.read_u64::<LittleEndian>()?);
    }
    if sizes.iter().any(|&s| s != sizes[0]) {
        return Err(Error::Format("only equal points per axis are supported".into()));
    }
    let n = usize::try_from(sizes[0]).map_err(|_| Error::Format("grid too large".into()))?;
    let length = r.read_f64::<LittleEndian>()?;
    let grid = GridSpec::new(dim, n, length)?;
    let count = comps
        .checked_mul(grid.len())
        .ok_or_else(|| Error::Format("grid too large".into()))?;
    let mut data = vec![0.0; count];
    r.read_f64_into::<LittleEndian>(&mut data)?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    Field::new(grid, comps, data)
}

pub fn save(path: impl AsRef<Path>, field: &Field) -> Result<()> {
    write_field(BufWriter::new(File::create(path)?), field)
}

pub fn load(path: impl AsRef<Path>) -> Result<Field> {
    read_field(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_bit_exact() {
        let g = GridSpec::new(2, 4, 1.5).unwrap();
        let f = Field::from_fn(g, 1, |x, _| x[0] + 2.0 * x[1]).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(&buf[..4], b"FNSV");
        assert_eq!(&buf[4..8], &1u32.to_le_bytes());
        assert_eq!(buf[8], 2);
        assert_eq!(buf[9], 1);
        assert_eq!(&buf[10..12], &[0, 0]);
        assert_eq!(&buf[12..20], &4u64.to_le_bytes());
        assert_eq!(&buf[20..28], &4u64.to_le_bytes());
        assert_eq!(&buf[28..36], &1.5f64.to_le_bytes());
        assert_eq!(buf.len(), 36 + 16 * 8);
        assert_eq!(&buf[36 + 8..36 + 16], &f.data()[1].to_le_bytes());
        let back = read_field(&buf[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn corrupt_files_rejected() {
        let g = GridSpec::new(1, 4, 1.0).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &Field::zeros(g, 1)).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_field(&bad[..]).is_err());
        assert!(read_field(&buf[..buf.len() - 1]).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(read_field(&long[..]).is_err());
    }
}
