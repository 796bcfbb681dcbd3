use std::path::Path;

use sphclass_core::sht::coeff_count;
use sphclass_core::ShSpectrum;

use super::{read_file, write_file_atomic, Reader};
use crate::error::{Error, Result};

pub const SPECTRUM_MAGIC: &[u8; 4] = b"SHS1";

pub fn write_spectra(path: &Path, spectra: &[ShSpectrum]) -> Result<()> {
    let degree = spectra.first().map(|s| s.degree()).ok_or_else(|| Error::format(path, "no spectra to write"))?;
    if spectra.iter().any(|s| s.degree() != degree) {
        return Err(Error::format(path, "spectra disagree on degree"));
    }
    let mut out = Vec::with_capacity(12 + 16 * spectra.len() * coeff_count(degree));
    out.extend_from_slice(SPECTRUM_MAGIC);
    out.extend_from_slice(&(spectra.len() as u32).to_le_bytes());
    out.extend_from_slice(&(degree as u32).to_le_bytes());
    for s in spectra {
        for c in s.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    write_file_atomic(path, &out)
}

pub fn read_spectra(path: &Path) -> Result<Vec<ShSpectrum>> {
    let bytes = read_file(path)?;
    let mut r = Reader::new(&bytes, path);
    r.magic(SPECTRUM_MAGIC)?;
    let (shells, degree) = (r.u32()? as usize, r.u32()? as usize);
    if degree > 4096 {
        return Err(Error::format(path, format!("implausible degree {degree}")));
    }
    let mut out = Vec::with_capacity(shells.min(4096));
    for _ in 0..shells {
        let coeffs = (0..coeff_count(degree))
            .map(|_| Ok(sphclass_core::sht::Complex64::new(r.f64()?, r.f64()?)))
            .collect::<Result<Vec<_>>>()?;
        out.push(ShSpectrum::from_coeffs(degree, coeffs)?);
    }
    r.finish()?;
    Ok(out)
}
