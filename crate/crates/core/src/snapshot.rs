//! Field snapshot container: grid parameters plus the row-major (eta
//! outer, xi inner) coefficient array, tagged with the Fourier
//! normalization so files are self-describing.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

pub const SNAPSHOT_FORMAT: &str = "nlscyl-snapshot-v1";
pub const NORMALIZATION_TAG: &str = "symmetric-1/(2pi)";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub format: String,
    pub normalization: String,
    pub l_x: f64,
    pub n_x: usize,
    pub n_y: usize,
    /// (re, im) pairs, eta outer, xi inner.
    pub coeffs: Vec<(f64, f64)>,
}

impl Snapshot {
    pub fn from_field(f: &SpectralField) -> Snapshot {
        let grid = f.grid();
        Snapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            normalization: NORMALIZATION_TAG.to_string(),
            l_x: grid.l_x(),
            n_x: grid.n_x(),
            n_y: grid.n_y(),
            coeffs: f.coeffs().iter().map(|c| (c.re, c.im)).collect(),
        }
    }

    pub fn into_field(self) -> Result<SpectralField> {
        if self.format != SNAPSHOT_FORMAT {
            return Err(Error::argument(format!(
                "unknown snapshot format `{}`, expected `{SNAPSHOT_FORMAT}`",
                self.format
            )));
        }
        if self.normalization != NORMALIZATION_TAG {
            return Err(Error::argument(format!(
                "unknown normalization tag `{}`, expected `{NORMALIZATION_TAG}`",
                self.normalization
            )));
        }
        let grid = Grid::new(self.l_x, self.n_x, self.n_y)?;
        let coeffs = self
            .coeffs
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        SpectralField::from_coeffs(&grid, coeffs)
    }
}

pub fn write_snapshot(f: &SpectralField, path: &Path) -> Result<()> {
    let bytes = serde_json::to_vec(&Snapshot::from_field(f))?;
    atomic_write(path, &bytes)
}

pub fn read_snapshot(path: &Path) -> Result<SpectralField> {
    let bytes = fs::read(path)?;
    let snap: Snapshot = serde_json::from_slice(&bytes)?;
    snap.into_field()
}

/// Write via a sibling temp file and rename, so readers never observe a
/// partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// FNV-1a checksum of a byte stream, reported as 16 hex digits. Used to
/// stamp input snapshots in output manifests.
pub fn checksum(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub fn checksum_file(path: &Path) -> Result<String> {
    Ok(checksum(&fs::read(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TAU;

    #[test]
    fn round_trip_preserves_field_exactly() {
        let grid = Grid::new(TAU, 16, 4).unwrap();
        let mut f = SpectralField::zeros(&grid);
        f.set_coeff(1, 3, Complex64::new(1.25, -0.5));
        f.set_coeff(2, 9, Complex64::new(-3.0, 1e-17));
        let dir = std::env::temp_dir().join("nlscyl-snapshot-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.json");
        write_snapshot(&f, &path).unwrap();
        let g = read_snapshot(&path).unwrap();
        assert_eq!(f, g);
        let c1 = checksum_file(&path).unwrap();
        write_snapshot(&f, &path).unwrap();
        assert_eq!(c1, checksum_file(&path).unwrap());
    }

    #[test]
    fn wrong_tags_are_rejected() {
        let grid = Grid::new(TAU, 8, 4).unwrap();
        let f = SpectralField::zeros(&grid);
        let mut snap = Snapshot::from_field(&f);
        snap.normalization = "plain".into();
        assert!(snap.into_field().is_err());
        let mut snap = Snapshot::from_field(&f);
        snap.format = "v0".into();
        assert!(snap.into_field().is_err());
        let mut snap = Snapshot::from_field(&f);
        snap.coeffs.pop();
        assert!(snap.into_field().is_err());
    }

    #[test]
    fn checksum_distinguishes_bytes() {
        assert_ne!(checksum(b"a"), checksum(b"b"));
        assert_eq!(checksum(b""), format!("{:016x}", 0xcbf29ce484222325u64));
    }
}
