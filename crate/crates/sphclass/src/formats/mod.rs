//! On-disk formats. Binary files start with a 4-byte magic and use
//! little-endian integers and floats throughout.
//!
//! | magic  | content          | body                                                      |
//! |--------|------------------|-----------------------------------------------------------|
//! | `SPC1` | point cloud      | u32 count, then count x (f32 x, y, z)                     |
//! | `SVG1` | voxel grid       | u32 shells, u32 resolution, u32 mode (0 density, 1 binary), f64 values `(shell, theta, phi)` |
//! | `SHS1` | shell spectra    | u32 shells, u32 degree, then per shell and packed `(l, m >= 0)` index: f64 re, f64 im |
//! | `SHNN` | model checkpoint | see `sphclass_core::net::checkpoint_to_bytes`             |
//!
//! Point clouds may also be plain text: one `x y z` triple per line
//! (whitespace or comma separated), `#` comments and blank lines ignored.

mod checkpoint;
mod grid;
mod pointcloud;
mod spectrum;

pub use checkpoint::{load_checkpoint, load_checkpoint_expecting, save_checkpoint};
pub use grid::{read_grid, write_grid, GRID_MAGIC};
pub use pointcloud::{
    parse_point_text, read_point_cloud, write_point_cloud, write_point_cloud_binary, write_point_cloud_text,
    POINTS_MAGIC,
};
pub use spectrum::{read_spectra, write_spectra, SPECTRUM_MAGIC};

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Writes through a sibling temporary file and renames it into place, so a
/// failed write never leaves a partial file at `path`.
pub(crate) fn write_file_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = std::path::PathBuf::from(tmp);
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Little-endian cursor over a byte slice that reports truncation.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8], path: &'a Path) -> Self {
        Reader { bytes, pos: 0, path }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::format(self.path, format!("truncated at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn magic(&mut self, magic: &[u8; 4]) -> Result<()> {
        if self.bytes.len() < 4 || &self.bytes[..4] != magic {
            return Err(Error::format(self.path, format!("expected magic {:?}", String::from_utf8_lossy(magic))));
        }
        self.pos = 4;
        Ok(())
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::format(self.path, format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}
