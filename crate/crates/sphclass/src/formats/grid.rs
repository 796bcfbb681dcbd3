use std::path::Path;

use sphclass_core::{GridSpec, OccupancyMode, SphericalVoxelGrid};

use super::{read_file, write_file_atomic, Reader};
use crate::error::{Error, Result};

pub const GRID_MAGIC: &[u8; 4] = b"SVG1";

pub fn write_grid(path: &Path, grid: &SphericalVoxelGrid) -> Result<()> {
    let spec = grid.spec();
    let mut out = Vec::with_capacity(16 + 8 * grid.values().len());
    out.extend_from_slice(GRID_MAGIC);
    let mode = match spec.mode {
        OccupancyMode::Density => 0u32,
        OccupancyMode::Binary => 1,
    };
    for v in [spec.shells as u32, spec.resolution as u32, mode] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in grid.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    write_file_atomic(path, &out)
}

pub fn read_grid(path: &Path) -> Result<SphericalVoxelGrid> {
    let bytes = read_file(path)?;
    let mut r = Reader::new(&bytes, path);
    r.magic(GRID_MAGIC)?;
    let (shells, resolution) = (r.u32()? as usize, r.u32()? as usize);
    let mode = match r.u32()? {
        0 => OccupancyMode::Density,
        1 => OccupancyMode::Binary,
        m => return Err(Error::format(path, format!("unknown occupancy mode {m}"))),
    };
    let spec = GridSpec::new(shells, resolution, mode)?;
    let values = (0..spec.voxel_count()).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(SphericalVoxelGrid::new(spec, values)?)
}
