//! Std companion to `sphclass-core`: file formats, datasets on disk, CSV
//! reports, config resolution and the `sphclass` command line.

pub mod cli;
pub mod config;
pub mod dataset_io;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod report;

pub use error::{Error, Result};
