//! `YMC1` binary field snapshots.
//!
//! A record is a 41-byte little-endian header followed by the field data:
//!
//! | offset | type    | content                    |
//! |--------|---------|----------------------------|
//! | 0      | [u8; 4] | magic `b"YMC1"`            |
//! | 4      | u32     | format version (1)         |
//! | 8      | u32     | N                          |
//! | 12     | u32     | K                          |
//! | 16     | f64     | L_box                      |
//! | 24     | f64     | g                          |
//! | 32     | f64     | t                          |
//! | 40     | u8      | kind (0 = A, 1 = E, 2 aux) |
//! | 41     | f64 × N³·K·3 | site-major, then color, then direction |
//!
//! A file may hold several records back to back; flow states are stored as
//! the `A` record followed by the `E` record.

use std::io::{Read, Write};

use crate::error::{Result, YmError};
use crate::lattice::{FieldKind, Grid, LatticeField};

pub const MAGIC: &[u8; 4] = b"YMC1";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 41;

/// A lattice field together with the run metadata stored beside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: LatticeField,
    pub coupling: f64,
    pub time: f64,
}

impl Snapshot {
    pub fn new(field: LatticeField, coupling: f64, time: f64) -> Self {
        Self {
            field,
            coupling,
            time,
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let grid = self.field.grid();
        let mut header = Vec::with_capacity(HEADER_LEN);
        header.extend_from_slice(MAGIC);
        header.extend_from_slice(&VERSION.to_le_bytes());
        header.extend_from_slice(&(grid.n() as u32).to_le_bytes());
        header.extend_from_slice(&(self.field.colors() as u32).to_le_bytes());
        header.extend_from_slice(&grid.l_box().to_le_bytes());
        header.extend_from_slice(&self.coupling.to_le_bytes());
        header.extend_from_slice(&self.time.to_le_bytes());
        header.push(self.field.kind() as u8);
        w.write_all(&header)?;
        let mut body = Vec::with_capacity(self.field.data().len() * 8);
        for v in self.field.data() {
            body.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&body)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// Read one record; `Ok(None)` on a clean end of stream.
    pub fn read_from<R: Read>(mut r: R) -> Result<Option<Self>> {
        let mut header = [0u8; HEADER_LEN];
        let mut filled = 0;
        while filled < HEADER_LEN {
            let k = r.read(&mut header[filled..])?;
            if k == 0 {
                break;
            }
            filled += k;
        }
        if filled == 0 {
            return Ok(None);
        }
        if filled < HEADER_LEN {
            return Err(YmError::Format("truncated snapshot header".into()));
        }
        if &header[0..4] != MAGIC {
            return Err(YmError::Format("bad snapshot magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(YmError::Format(format!("unsupported snapshot version {version}")));
        }
        let n = u32_at(8) as usize;
        let k = u32_at(12) as usize;
        let l_box = f64_at(16);
        let coupling = f64_at(24);
        let time = f64_at(32);
        let kind = FieldKind::from_u8(header[40])
            .ok_or_else(|| YmError::Format(format!("unknown field kind {}", header[40])))?;
        let grid = Grid::new(n, l_box).map_err(|e| YmError::Format(e.to_string()))?;
        let len = grid.sites() * k * 3;
        let mut body = vec![0u8; len * 8];
        r.read_exact(&mut body)
            .map_err(|_| YmError::Format("truncated snapshot body".into()))?;
        let data = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let field = LatticeField::from_vec(grid, k, kind, data)
            .map_err(|e| YmError::Format(e.to_string()))?;
        Ok(Some(Self {
            field,
            coupling,
            time,
        }))
    }

    /// Every record in a byte stream.
    pub fn read_all<R: Read>(mut r: R) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        while let Some(s) = Self::read_from(&mut r)? {
            out.push(s);
        }
        Ok(out)
    }

    pub fn save(path: &std::path::Path, records: &[Snapshot]) -> Result<()> {
        let mut bytes = Vec::new();
        for s in records {
            s.write_to(&mut bytes)?;
        }
        std::fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Vec<Self>> {
        let bytes = std::fs::read(path)?;
        Self::read_all(&bytes[..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let grid = Grid::new(4, 2.5).unwrap();
        let field = LatticeField::from_fn(grid, 3, FieldKind::Momentum, |s, a, i| (s + a + i) as f64);
        let bytes = Snapshot::new(field, 0.2, 1.5).to_bytes();
        assert_eq!(bytes.len(), HEADER_LEN + 64 * 9 * 8);
        assert_eq!(&bytes[0..4], b"YMC1");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 4);
        assert_eq!(bytes[40], 1);
        // first data value is (site 0, color 0, dir 0), second is dir 1
        assert_eq!(f64::from_le_bytes(bytes[49..57].try_into().unwrap()), 1.0);
    }

    #[test]
    fn multi_record_roundtrip_and_errors() {
        let grid = Grid::new(4, 1.0).unwrap();
        let a = LatticeField::from_fn(grid, 3, FieldKind::Potential, |s, a, i| (s * 7 + a * 3 + i) as f64 * 0.01);
        let e = a.scaled(-2.0).with_kind(FieldKind::Momentum);
        let mut bytes = Snapshot::new(a.clone(), 0.3, 0.0).to_bytes();
        bytes.extend(Snapshot::new(e.clone(), 0.3, 0.0).to_bytes());
        let back = Snapshot::read_all(&bytes[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].field, a);
        assert_eq!(back[1].field, e);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Snapshot::read_all(&bad[..]).is_err());
        assert!(Snapshot::read_all(&bytes[..100]).is_err());
    }
}
