//! Point-cloud classification from spherical-harmonic spectra of
//! concentric-sphere density grids.
//!
//! The pipeline is
//!
//! ```text
//! PointCloud -> voxelize (c shells x n x n) -> forward SHT per shell
//!            -> zonal spectral convolution -> PReLU -> |coefficients|
//!            -> dense (PReLU) -> class logits
//! ```
//!
//! Everything here is pure computation over `alloc` collections; file formats,
//! dataset directories and the command line live in the `sphclass` crate.

#![no_std]
// With std linked, float methods resolve inherently and the libm trait imports go unused.
#![cfg_attr(any(test, feature = "std"), allow(unused_imports))]

extern crate alloc;

pub mod bench;
pub mod datasets;
pub mod error;
pub mod geometry;
pub mod net;
pub mod rng;
pub mod sht;
pub mod voxelizer;

pub use error::{Error, Result};
pub use geometry::{BallFit, Point, PointCloud};
pub use sht::{ShSpectrum, ShTransform, SphericalSignal};
pub use voxelizer::{GridSpec, OccupancyMode, SphericalVoxelGrid};
