//! Spherical harmonic basis, discrete transforms on the equiangular grid,
//! and the magnitude (F1) and degree-energy (F2) descriptors.
//!
//! Conventions: orthonormal `Y_l^m` with the Condon-Shortley phase,
//! `theta` is the colatitude in `[0, pi]`, `phi` the longitude in `[0, 2 pi)`.

mod descriptor;
mod legendre;
mod quadrature;
mod transform;

#[cfg(test)]
mod tests;

pub use descriptor::{descriptor, descriptor_f1, descriptor_f2, DescriptorKind, DescriptorVector};
pub use legendre::{assoc_legendre_normalized, coeff_count, evaluate_basis, lm_index};
pub use quadrature::{grid_phi, grid_theta, quadrature_weights, QuadratureWeights};
pub use num_complex::Complex64;
pub use transform::{forward, inverse, ShSpectrum, ShTransform, SphericalSignal};
