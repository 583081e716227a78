//! Eigenvalue dumps: magic `LAEV`, `u32` version, `u64` count, then the
//! values as `f64`, all little-endian.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fields::Grid2D;

const MAGIC: &[u8; 4] = b"LAEV";
const VERSION: u32 = 1;

pub fn write_laev(path: &Path, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + 8 * values.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_laev(path: &Path) -> Result<Vec<f64>> {
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |what: &str| Error::Validation(format!("{}: {what}", path.display()));
    if buf.len() < 16 || &buf[..4] != MAGIC {
        return Err(bad("not an eigenvalue dump"));
    }
    let version = u32::from_le_bytes(buf[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(bad(&format!("unsupported dump version {version}")));
    }
    let n = u64::from_le_bytes(buf[8..16].try_into().unwrap()) as usize;
    if buf.len() != 16 + 8 * n {
        return Err(bad("truncated dump"));
    }
    Ok(buf[16..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

/// Hex SHA-256 of the scenario fingerprint, grid and `(μ, h)`.
pub fn cache_key(scenario: &str, grid: &Grid2D, mu: f64, h: f64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(scenario.as_bytes());
    for v in [grid.nx as u64, grid.ny as u64] {
        hasher.update(v.to_le_bytes());
    }
    for v in [grid.x_min, grid.x_max, grid.y_min, grid.y_max, mu, h] {
        hasher.update(v.to_bits().to_le_bytes());
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
