//! Binary checkpoint layout (all little-endian):
//!
//! ```text
//! "SHNN"  u16 version (= 1)
//! u32 filters, shells, degree, resolution, hidden, classes,
//!     layers, feature mode, ift resolution, occupancy, normalize counts
//! u64 optimizer step
//! f32 x total   parameter values in Layout order
//! f32 x total   first moments
//! f32 x total   second moments
//! ```

use alloc::vec::Vec;

use super::config::{FeatureMode, NetConfig};
use super::params::{Layout, ModelParams};
use crate::error::{Error, Result};
use crate::voxelizer::OccupancyMode;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"SHNN";
pub const CHECKPOINT_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 11 * 4 + 8;

pub fn checkpoint_to_bytes(params: &ModelParams) -> Vec<u8> {
    let cfg = params.config();
    let (m, v) = params.moments();
    let mut out = Vec::with_capacity(HEADER_LEN + 12 * params.values().len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let fields = [
        cfg.filters as u32,
        cfg.shells as u32,
        cfg.degree as u32,
        cfg.resolution as u32,
        cfg.hidden as u32,
        cfg.classes as u32,
        cfg.layers as u32,
        cfg.features.code(),
        cfg.ift_resolution as u32,
        match cfg.occupancy {
            OccupancyMode::Density => 0,
            OccupancyMode::Binary => 1,
        },
        cfg.normalize_counts as u32,
    ];
    for f in fields {
        out.extend_from_slice(&f.to_le_bytes());
    }
    out.extend_from_slice(&params.step().to_le_bytes());
    for x in params.values().iter().chain(m).chain(v) {
        out.extend_from_slice(&(*x as f32).to_le_bytes());
    }
    out
}

fn bad(msg: impl Into<alloc::string::String>) -> Error {
    Error::InvalidParameter(alloc::format!("checkpoint: {}", msg.into()))
}

/// Reads only the architecture from a checkpoint header.
pub fn checkpoint_config(bytes: &[u8]) -> Result<NetConfig> {
    if bytes.len() < 6 || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != CHECKPOINT_VERSION {
        return Err(bad(alloc::format!("unsupported version {version}")));
    }
    if bytes.len() < HEADER_LEN {
        return Err(bad("truncated header"));
    }
    let field = |i: usize| u32::from_le_bytes(bytes[6 + 4 * i..10 + 4 * i].try_into().unwrap()) as usize;
    let features = FeatureMode::from_code(field(7) as u32).ok_or_else(|| bad("unknown feature mode"))?;
    let occupancy = match field(9) {
        0 => OccupancyMode::Density,
        1 => OccupancyMode::Binary,
        other => return Err(bad(alloc::format!("unknown occupancy code {other}"))),
    };
    let cfg = NetConfig {
        filters: field(0),
        shells: field(1),
        degree: field(2),
        resolution: field(3),
        hidden: field(4),
        classes: field(5),
        layers: field(6),
        features,
        ift_resolution: field(8),
        occupancy,
        normalize_counts: field(10) != 0,
    };
    cfg.validate().map_err(|e| bad(alloc::format!("invalid architecture: {e}")))?;
    Ok(cfg)
}

pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<ModelParams> {
    let cfg = checkpoint_config(bytes)?;
    let step = u64::from_le_bytes(bytes[HEADER_LEN - 8..HEADER_LEN].try_into().unwrap());
    let total = Layout::new(&cfg).total;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 12 * total {
        return Err(bad(alloc::format!(
            "expected {} tensor bytes, found {} (truncated or corrupt)",
            12 * total,
            body.len()
        )));
    }
    let floats: Vec<f64> =
        body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect();
    let (values, rest) = floats.split_at(total);
    let (m, v) = rest.split_at(total);
    ModelParams::from_parts(cfg, values.to_vec(), Some((m.to_vec(), v.to_vec())), step)
}

/// Like [`checkpoint_from_bytes`] but rejects a checkpoint whose
/// architecture differs from `expected`.
pub fn checkpoint_from_bytes_expecting(bytes: &[u8], expected: &NetConfig) -> Result<ModelParams> {
    let cfg = checkpoint_config(bytes)?;
    if cfg != *expected {
        return Err(Error::ShapeMismatch(alloc::format!(
            "checkpoint architecture ({}) differs from expected ({})",
            cfg.describe(),
            expected.describe()
        )));
    }
    checkpoint_from_bytes(bytes)
}
