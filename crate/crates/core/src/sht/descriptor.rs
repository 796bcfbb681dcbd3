use alloc::vec::Vec;

use super::legendre::coeff_count;
use super::transform::ShSpectrum;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DescriptorKind {
    /// Per-coefficient magnitudes `|f_lm|`, `m >= 0`.
    F1,
    /// Per-degree energies `sqrt(sum_{|m| <= l} |f_lm|^2)`.
    F2,
}

impl DescriptorKind {
    pub fn per_shell_len(self, degree: usize) -> usize {
        match self {
            DescriptorKind::F1 => coeff_count(degree),
            DescriptorKind::F2 => degree + 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DescriptorKind::F1 => "F1",
            DescriptorKind::F2 => "F2",
        }
    }
}

/// Non-negative feature vector, concatenated shell by shell.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorVector {
    pub kind: DescriptorKind,
    pub per_shell: usize,
    pub values: Vec<f64>,
}

fn shared_degree(spectra: &[ShSpectrum]) -> Result<usize> {
    let first = spectra.first().ok_or_else(|| Error::ShapeMismatch("no shells".into()))?;
    if let Some(bad) = spectra.iter().find(|s| s.degree() != first.degree()) {
        return Err(Error::ShapeMismatch(alloc::format!(
            "shells disagree on degree ({} vs {})",
            first.degree(),
            bad.degree()
        )));
    }
    Ok(first.degree())
}

pub fn descriptor_f1(spectra: &[ShSpectrum]) -> Result<DescriptorVector> {
    let degree = shared_degree(spectra)?;
    let values = spectra.iter().flat_map(|s| s.coeffs().iter().map(|c| c.norm())).collect();
    Ok(DescriptorVector { kind: DescriptorKind::F1, per_shell: coeff_count(degree), values })
}

pub fn descriptor_f2(spectra: &[ShSpectrum]) -> Result<DescriptorVector> {
    let degree = shared_degree(spectra)?;
    let values = spectra
        .iter()
        .flat_map(|s| (0..=degree).map(move |l| s.degree_energy(l)))
        .collect();
    Ok(DescriptorVector { kind: DescriptorKind::F2, per_shell: degree + 1, values })
}

pub fn descriptor(kind: DescriptorKind, spectra: &[ShSpectrum]) -> Result<DescriptorVector> {
    match kind {
        DescriptorKind::F1 => descriptor_f1(spectra),
        DescriptorKind::F2 => descriptor_f2(spectra),
    }
}
