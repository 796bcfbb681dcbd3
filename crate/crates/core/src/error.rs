use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptyCloud,
    DegenerateCloud,
    /// A point lies outside the unit ball; carries its radius.
    Unnormalized(f64),
    InvalidParameter(String),
    NoFullCluster { cluster_size: usize, budget: f64 },
    /// Grid resolution too small for the requested degree.
    Bandwidth { resolution: usize, degree: usize },
    RankDeficient,
    /// Imaginary residue left after an inverse transform.
    NonRealSpectrum(f64),
    IndexOutOfRange { index: usize, len: usize },
    ShapeMismatch(String),
    EmptyDataset,
    UnknownClass(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyCloud => write!(f, "empty cloud"),
            Error::DegenerateCloud => write!(f, "degenerate cloud"),
            Error::Unnormalized(r) => {
                write!(f, "unnormalized cloud: point at radius {r} outside the unit ball")
            }
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NoFullCluster { cluster_size, budget } => write!(
                f,
                "no full cluster fits: cluster size {cluster_size} exceeds outlier budget {budget}"
            ),
            Error::Bandwidth { resolution, degree } => write!(
                f,
                "bandwidth violation: resolution {resolution} < 2*(degree+1) for degree {degree}"
            ),
            Error::RankDeficient => write!(f, "quadrature system is rank deficient"),
            Error::NonRealSpectrum(r) => {
                write!(f, "spectrum does not describe a real signal (imaginary residue {r:e})")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range (len {len})")
            }
            Error::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            Error::EmptyDataset => write!(f, "empty dataset"),
            Error::UnknownClass(name) => write!(f, "unknown class '{name}'"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
