//! GPSN: `b"GPSN"`, then little-endian `u32` version, `u32` d, `u32 n[d]`,
//! `f64 L[d]`, `f64` t and the field as `(re, im)` pairs, last axis fastest.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid, Space};

pub const GPSN_MAGIC: &[u8; 4] = b"GPSN";
pub const GPSN_VERSION: u32 = 1;

/// Byte length of a snapshot of `shape`.
pub fn snapshot_len(shape: &[usize]) -> usize {
    let d = shape.len();
    4 + 4 + 4 + 4 * d + 8 * d + 8 + 16 * shape.iter().product::<usize>()
}

pub fn write_snapshot(f: &ComplexField, t: f64) -> Result<Vec<u8>> {
    f.require_space(Space::Physical)?;
    let g = f.grid();
    let mut out = Vec::with_capacity(snapshot_len(g.shape()));
    out.extend_from_slice(GPSN_MAGIC);
    out.extend_from_slice(&GPSN_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    for &n in g.shape() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for &l in g.half_lengths() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.extend_from_slice(&t.to_le_bytes());
    for z in f.data() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Snapshot(format!("truncated while reading {what} at byte {}", self.pos)))?;
        self.pos = end;
        Ok(chunk.try_into().expect("slice has length N"))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.take::<4>(what).map(u32::from_le_bytes)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        self.take::<8>(what).map(f64::from_le_bytes)
    }
}

pub fn read_snapshot(bytes: &[u8]) -> Result<(f64, ComplexField)> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<4>("magic")? != GPSN_MAGIC {
        return Err(Error::Snapshot("bad magic, not a GPSN file".into()));
    }
    let version = r.u32("version")?;
    if version != GPSN_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let d = r.u32("dimension")? as usize;
    if d != 2 && d != 3 {
        return Err(Error::Snapshot(format!("dimension {d} is not 2 or 3")));
    }
    let n = (0..d).map(|_| r.u32("shape").map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let l = (0..d).map(|_| r.f64("box")).collect::<Result<Vec<_>>>()?;
    let t = r.f64("time")?;
    let expected = snapshot_len(&n);
    if bytes.len() != expected {
        return Err(Error::Snapshot(format!(
            "payload has {} bytes, shape {n:?} needs {expected}",
            bytes.len()
        )));
    }
    let grid = Arc::new(Grid::new(&n, &l).map_err(|e| Error::Snapshot(e.to_string()))?);
    let data = bytes[r.pos..]
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok((t, ComplexField::from_vec(&grid, data, Space::Physical)?))
}

pub fn write_snapshot_file(path: &Path, f: &ComplexField, t: f64) -> Result<()> {
    std::fs::write(path, write_snapshot(f, t)?)?;
    Ok(())
}

pub fn read_snapshot_file(path: &Path) -> Result<(f64, ComplexField)> {
    read_snapshot(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> ComplexField {
        let g = Arc::new(Grid::new(&[8, 8], &[4.0, 3.0]).unwrap());
        ComplexField::from_fn(&g, |x| Complex64::new(x[0].sin(), -x[1] * 1e-300))
    }

    #[test]
    fn size_and_layout() {
        let f = field();
        let b = write_snapshot(&f, 0.25).unwrap();
        assert_eq!(b.len(), 4 + 4 + 4 + 8 + 16 + 8 + 1024);
        assert_eq!(snapshot_len(&[8, 8]), b.len());
        assert_eq!(&b[..4], b"GPSN");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(b[20..28].try_into().unwrap()), 4.0);
        assert_eq!(f64::from_le_bytes(b[36..44].try_into().unwrap()), 0.25);
        // second value is (i=0, j=1)
        let z1 = f64::from_le_bytes(b[60..68].try_into().unwrap());
        assert_eq!(z1.to_bits(), f.data()[1].re.to_bits());
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let f = field();
        let (t, h) = read_snapshot(&write_snapshot(&f, -1.5).unwrap()).unwrap();
        assert_eq!(t, -1.5);
        assert_eq!(h.grid().shape(), f.grid().shape());
        assert_eq!(h.grid().half_lengths(), f.grid().half_lengths());
        for (a, b) in f.data().iter().zip(h.data()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn corrupt_files() {
        let b = write_snapshot(&field(), 0.0).unwrap();
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(read_snapshot(&bad).is_err());
        let mut bad = b.clone();
        bad[4] = 2;
        assert!(read_snapshot(&bad).unwrap_err().to_string().contains("version"));
        assert!(read_snapshot(&b[..b.len() - 1]).is_err());
        assert!(read_snapshot(&b[..10]).unwrap_err().to_string().contains("truncated"));
    }
}
