use std::path::Path;

use sphclass_core::net::{checkpoint_from_bytes, checkpoint_from_bytes_expecting, checkpoint_to_bytes, ModelParams, NetConfig};

use super::{read_file, write_file_atomic};
use crate::error::{Error, Result};

pub fn save_checkpoint(params: &ModelParams, path: &Path) -> Result<()> {
    write_file_atomic(path, &checkpoint_to_bytes(params))
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams> {
    checkpoint_from_bytes(&read_file(path)?).map_err(|e| Error::format(path, e.to_string()))
}

/// Fails with a shape mismatch when the stored architecture is not `expected`.
pub fn load_checkpoint_expecting(path: &Path, expected: &NetConfig) -> Result<ModelParams> {
    checkpoint_from_bytes_expecting(&read_file(path)?, expected).map_err(|e| Error::format(path, e.to_string()))
}
