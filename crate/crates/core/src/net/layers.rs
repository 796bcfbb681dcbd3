use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sht::{coeff_count, ShSpectrum, ShTransform};

/// Complex spectra as split real/imaginary planes laid out
/// `(channel, shell, lm)` with `lm` in the packed `m >= 0` order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMaps {
    pub channels: usize,
    pub shells: usize,
    pub degree: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl SpectralMaps {
    pub fn zeros(channels: usize, shells: usize, degree: usize) -> Self {
        let len = channels * shells * coeff_count(degree);
        SpectralMaps { channels, shells, degree, re: alloc::vec![0.0; len], im: alloc::vec![0.0; len] }
    }

    /// One channel holding the given per-shell spectra.
    pub fn from_spectra(spectra: &[ShSpectrum]) -> Result<Self> {
        let degree = spectra.first().ok_or_else(|| Error::ShapeMismatch("no shells".into()))?.degree();
        let mut out = SpectralMaps::zeros(1, spectra.len(), degree);
        let p = coeff_count(degree);
        for (s, spec) in spectra.iter().enumerate() {
            if spec.degree() != degree {
                return Err(Error::ShapeMismatch("shells disagree on degree".into()));
            }
            for (i, c) in spec.coeffs().iter().enumerate() {
                out.re[s * p + i] = c.re;
                out.im[s * p + i] = c.im;
            }
        }
        Ok(out)
    }

    pub fn coeffs(&self) -> usize {
        coeff_count(self.degree)
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn spectrum(&self, channel: usize, shell: usize) -> ShSpectrum {
        let p = self.coeffs();
        let base = (channel * self.shells + shell) * p;
        let coeffs = (0..p)
            .map(|i| num_complex::Complex64::new(self.re[base + i], self.im[base + i]))
            .collect();
        ShSpectrum::from_coeffs(self.degree, coeffs).expect("length matches degree")
    }
}

/// Zonal kernel coefficients `h_l^0`, laid out
/// `(filter, in_channel, shell, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalKernel {
    pub filters: usize,
    pub in_channels: usize,
    pub shells: usize,
    pub degree: usize,
    pub h: Vec<f64>,
}

impl ZonalKernel {
    pub fn new(filters: usize, in_channels: usize, shells: usize, degree: usize, h: Vec<f64>) -> Result<Self> {
        if h.len() != filters * in_channels * shells * (degree + 1) {
            return Err(Error::ShapeMismatch(alloc::format!(
                "kernel {filters}x{in_channels}x{shells}x{} needs {} values, got {}",
                degree + 1,
                filters * in_channels * shells * (degree + 1),
                h.len()
            )));
        }
        Ok(ZonalKernel { filters, in_channels, shells, degree, h })
    }

    /// The kernel whose convolution returns its input: `h_l^0 = sqrt((2l+1)/(4 pi))`.
    pub fn identity(shells: usize, degree: usize) -> Self {
        let h = (0..shells).flat_map(|_| (0..=degree).map(|l| 1.0 / conv_gain(l))).collect();
        ZonalKernel { filters: 1, in_channels: 1, shells, degree, h }
    }
}

/// `sqrt(4 pi / (2l + 1))`.
#[inline]
pub fn conv_gain(l: usize) -> f64 {
    (4.0 * PI / (2 * l + 1) as f64).sqrt()
}

pub(crate) fn conv_gains(degree: usize) -> Vec<f64> {
    (0..=degree).map(conv_gain).collect()
}

/// Degree of each packed coefficient index.
pub(crate) fn degree_of_index(degree: usize) -> Vec<usize> {
    (0..=degree).flat_map(|l| core::iter::repeat_n(l, l + 1)).collect()
}

/// Per-shell zonal convolution
/// `out[o][s][lm] = sqrt(4 pi/(2l+1)) sum_i h[o][i][s][l] in[i][s][lm]`.
/// With one input channel this is the plain product of each shell spectrum
/// with its own kernel.
pub fn zonal_conv(input: &SpectralMaps, kernel: &ZonalKernel) -> Result<SpectralMaps> {
    if kernel.degree != input.degree || kernel.shells != input.shells || kernel.in_channels != input.channels {
        return Err(Error::ShapeMismatch(alloc::format!(
            "kernel (in {}, shells {}, degree {}) does not fit spectra (channels {}, shells {}, degree {})",
            kernel.in_channels,
            kernel.shells,
            kernel.degree,
            input.channels,
            input.shells,
            input.degree
        )));
    }
    let mut out = SpectralMaps::zeros(kernel.filters, input.shells, input.degree);
    conv_into(input, &kernel.h, kernel.filters, &conv_gains(input.degree), &degree_of_index(input.degree), &mut out);
    Ok(out)
}

pub(crate) fn conv_into(
    input: &SpectralMaps,
    h: &[f64],
    filters: usize,
    gains: &[f64],
    lof: &[usize],
    out: &mut SpectralMaps,
) {
    let (ci, c, p, lp) = (input.channels, input.shells, input.coeffs(), input.degree + 1);
    out.re.iter_mut().for_each(|v| *v = 0.0);
    out.im.iter_mut().for_each(|v| *v = 0.0);
    for o in 0..filters {
        for i in 0..ci {
            for s in 0..c {
                let hk = &h[((o * ci + i) * c + s) * lp..][..lp];
                let src = (i * c + s) * p;
                let dst = (o * c + s) * p;
                for idx in 0..p {
                    let g = gains[lof[idx]] * hk[lof[idx]];
                    out.re[dst + idx] += g * input.re[src + idx];
                    out.im[dst + idx] += g * input.im[src + idx];
                }
            }
        }
    }
}

/// Inverse transform of every (channel, shell) spectrum onto `plan`'s grid,
/// flattened `(channel, shell, theta, phi)`.
pub fn inverse_after_conv(maps: &SpectralMaps, plan: &ShTransform) -> Result<Vec<f64>> {
    if plan.degree() != maps.degree {
        return Err(Error::ShapeMismatch("transform degree differs from spectra".into()));
    }
    let nn = plan.resolution() * plan.resolution();
    let p = maps.coeffs();
    let mut out = alloc::vec![0.0; maps.channels * maps.shells * nn];
    for (b, dst) in out.chunks_exact_mut(nn).enumerate() {
        plan.inverse_into(&maps.re[b * p..(b + 1) * p], &maps.im[b * p..(b + 1) * p], dst);
    }
    Ok(out)
}

/// `|coefficient|` per `(channel, shell, l, m >= 0)`, in storage order.
pub fn magnitude_features(maps: &SpectralMaps) -> Vec<f64> {
    maps.re.iter().zip(&maps.im).map(|(a, b)| a.hypot(*b)).collect()
}

#[inline]
pub(crate) fn prelu(x: f64, a: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        a * x
    }
}

/// `C = A B + beta C` with `C` row-major `m x n`; `A` is `m x k` and `B` is
/// `k x n`, each given with explicit (row, column) strides.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(c.len() >= m * n);
    if k == 0 {
        c[..m * n].iter_mut().for_each(|v| *v *= beta);
        return;
    }
    assert!(a.len() > (m - 1) * rsa + (k - 1) * csa);
    assert!(b.len() > (k - 1) * rsb + (n - 1) * csb);
    // SAFETY: the asserts above keep every strided access inside the slices.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
