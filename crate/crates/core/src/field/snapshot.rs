//! MSPF snapshot files.
//!
//! Layout, all little-endian: magic `MSPF`, `u32` version, `u32` d, `u32` N,
//! `f64` L, `u8` space flag (0 physical, 1 frequency), then `N^d` pairs of
//! `f64` (re, im) in row-major order with axis 0 slowest. Frequency-space
//! files store modes in FFT order.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{GridSpec, SampledField, Space};
use crate::error::{Error, Result};
use crate::io::write_atomic;

pub const MAGIC: &[u8; 4] = b"MSPF";
pub const VERSION: u32 = 1;

pub fn encode(field: &SampledField) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(25 + 16 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.length().to_le_bytes());
    out.push(match field.space() {
        Space::Physical => 0,
        Space::Frequency => 1,
    });
    for v in field.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn take<const K: usize>(bytes: &[u8], pos: &mut usize) -> Result<[u8; K]> {
    let end = *pos + K;
    let slice = bytes
        .get(*pos..end)
        .ok_or_else(|| Error::Format("truncated snapshot".into()))?;
    *pos = end;
    Ok(slice.try_into().expect("slice length"))
}

pub fn decode(bytes: &[u8]) -> Result<SampledField> {
    let mut pos = 0;
    if &take::<4>(bytes, &mut pos)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(bytes, &mut pos)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes(take(bytes, &mut pos)?) as usize;
    let n = u32::from_le_bytes(take(bytes, &mut pos)?) as usize;
    let length = f64::from_le_bytes(take(bytes, &mut pos)?);
    let grid = GridSpec::new(dim, n, length)?;
    let space = match take::<1>(bytes, &mut pos)?[0] {
        0 => Space::Physical,
        1 => Space::Frequency,
        other => return Err(Error::Format(format!("bad space flag {other}"))),
    };
    if bytes.len() != pos + 16 * grid.len() {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            16 * grid.len(),
            bytes.len() - pos
        )));
    }
    let values = bytes[pos..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    SampledField::new(grid, values, space)
}

pub fn write(path: &Path, field: &SampledField) -> Result<()> {
    write_atomic(path, &encode(field))
}

pub fn write_to(mut w: impl Write, field: &SampledField) -> Result<()> {
    w.write_all(&encode(field))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<SampledField> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}
