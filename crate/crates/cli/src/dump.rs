//! Self-describing binary field dumps with bit-exact round trips, plus an
//! optional CSV export for inspection.
//!
//! Layout (all little-endian):
//! ```text
//! bytes 0..8   magic "RBSLABF1"
//! u32          format version (1)
//! u32          n_x
//! u32          n_radial
//! u32          n_polar
//! u32          n_azimuth
//! f64          pmax
//! f64 * n      values, p-major: values[ip * n_x + ix]
//! ```

use std::io::Write;
use std::path::Path;

use rbe_slab_core::field::{DistField, PhaseGrid};

const MAGIC: &[u8; 8] = b"RBSLABF1";
const VERSION: u32 = 1;

/// Grid descriptors stored alongside the raw values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpHeader {
    pub n_x: u32,
    pub n_radial: u32,
    pub n_polar: u32,
    pub n_azimuth: u32,
    pub pmax: f64,
}

pub fn write_field(path: &Path, grid: &PhaseGrid<f64>, field: &DistField<f64>) -> Result<(), String> {
    let quad = &grid.quad;
    let mut buf = Vec::with_capacity(44 + field.values.len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(field.n_x as u32).to_le_bytes());
    buf.extend_from_slice(&(quad.n_radial as u32).to_le_bytes());
    buf.extend_from_slice(&(quad.n_polar as u32).to_le_bytes());
    buf.extend_from_slice(&(quad.n_azimuth as u32).to_le_bytes());
    buf.extend_from_slice(&quad.pmax.to_le_bytes());
    for v in &field.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, buf).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

pub fn read_field(path: &Path) -> Result<(DumpHeader, DistField<f64>), String> {
    let bytes =
        std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let fail = |what: &str| format!("{}: {what}", path.display());
    if bytes.len() < 44 || &bytes[0..8] != MAGIC {
        return Err(fail("not a field dump (bad magic)"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    if u32_at(8) != VERSION {
        return Err(fail("unsupported format version"));
    }
    let header = DumpHeader {
        n_x: u32_at(12),
        n_radial: u32_at(16),
        n_polar: u32_at(20),
        n_azimuth: u32_at(24),
        pmax: f64::from_le_bytes(bytes[28..36].try_into().unwrap()),
    };
    let n_p = header.n_radial as usize * header.n_polar as usize * header.n_azimuth as usize;
    let n = header.n_x as usize * n_p;
    if bytes.len() != 36 + 8 * n {
        return Err(fail("truncated field dump"));
    }
    let values: Vec<f64> = bytes[36..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((
        header,
        DistField { values, n_x: header.n_x as usize, n_p },
    ))
}

/// Rows `x1,p1,p2,p3,f` over the whole grid.
pub fn write_csv(path: &Path, grid: &PhaseGrid<f64>, field: &DistField<f64>) -> Result<(), String> {
    let mut out = Vec::new();
    writeln!(out, "x1,p1,p2,p3,f").unwrap();
    for ip in 0..field.n_p {
        let p = &grid.quad.nodes[ip];
        for ix in 0..field.n_x {
            writeln!(
                out,
                "{},{},{},{},{}",
                grid.xs[ix],
                p.p[0],
                p.p[1],
                p.p[2],
                field.get(ix, ip)
            )
            .unwrap();
        }
    }
    std::fs::write(path, out).map_err(|e| format!("cannot write {}: {e}", path.display()))
}
