use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use super::legendre::{coeff_count, evaluate_basis, lm_index, normalized_legendre_table};
use super::quadrature::{grid_phi, grid_theta, quadrature_weights, QuadratureWeights};
use crate::error::{invalid, Error, Result};

/// Real samples `f(theta_j, phi_k)` on the `n x n` grid, row-major in
/// `(theta, phi)`, with `theta_j = pi (j + 1/2) / n` and `phi_k = 2 pi k / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSignal {
    n: usize,
    values: Vec<f64>,
}

impl SphericalSignal {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(invalid("signal resolution must be even and positive"));
        }
        if values.len() != n * n {
            return Err(Error::ShapeMismatch(alloc::format!(
                "signal of resolution {n} needs {} samples, got {}",
                n * n,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("signal values must be finite"));
        }
        Ok(SphericalSignal { n, values })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, alloc::vec![0.0; n * n])
    }

    /// Samples `f(theta, phi)` at every grid node.
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                values.push(f(grid_theta(j, n), grid_phi(k, n)));
            }
        }
        Self::new(n, values)
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.n + k]
    }

    pub fn theta(&self, j: usize) -> f64 {
        grid_theta(j, self.n)
    }

    pub fn phi(&self, k: usize) -> f64 {
        grid_phi(k, self.n)
    }

    /// The signal rotated about the pole by `2 pi t / n`: every row shifted
    /// circularly by `t` columns.
    pub fn shift_phi(&self, t: usize) -> Self {
        let n = self.n;
        let mut values = alloc::vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                values[j * n + (k + t) % n] = self.values[j * n + k];
            }
        }
        SphericalSignal { n, values }
    }
}

/// Coefficients `f_lm` for `0 <= m <= l <= degree`, stored at
/// `l (l + 1) / 2 + m`. For real signals the negative orders follow from
/// `f_{l,-m} = (-1)^m conj(f_lm)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShSpectrum {
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl ShSpectrum {
    pub fn zeros(degree: usize) -> Self {
        ShSpectrum { degree, coeffs: alloc::vec![Complex64::new(0.0, 0.0); coeff_count(degree)] }
    }

    pub fn from_coeffs(degree: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != coeff_count(degree) {
            return Err(Error::ShapeMismatch(alloc::format!(
                "degree {degree} needs {} coefficients, got {}",
                coeff_count(degree),
                coeffs.len()
            )));
        }
        Ok(ShSpectrum { degree, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, l: usize, m: usize) -> Complex64 {
        self.coeffs[lm_index(l, m)]
    }

    pub fn set(&mut self, l: usize, m: usize, value: Complex64) {
        self.coeffs[lm_index(l, m)] = value;
    }

    /// Coefficient for a signed order, using conjugate symmetry for `m < 0`.
    pub fn get_signed(&self, l: usize, m: i64) -> Complex64 {
        let c = self.get(l, m.unsigned_abs() as usize);
        if m >= 0 {
            c
        } else if m % 2 == 0 {
            c.conj()
        } else {
            -c.conj()
        }
    }

    /// Degree energy `sqrt(sum_{m=-l}^{l} |f_lm|^2)`.
    pub fn degree_energy(&self, l: usize) -> f64 {
        let mut e = self.get(l, 0).norm_sqr();
        for m in 1..=l {
            e += 2.0 * self.get(l, m).norm_sqr();
        }
        e.sqrt()
    }
}

/// Precomputed forward/inverse transform between `n x n` signals and spectra
/// of degree `degree`. Immutable once built; share it freely.
#[derive(Debug, Clone)]
pub struct ShTransform {
    n: usize,
    degree: usize,
    weights: QuadratureWeights,
    /// `legendre[j * P + lm]`, `P = coeff_count(degree)`.
    legendre: Vec<f64>,
    /// `cos(m phi_k)` and `sin(m phi_k)` at `[m * n + k]`.
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

impl ShTransform {
    pub fn new(n: usize, degree: usize) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(invalid("signal resolution must be even and positive"));
        }
        let weights = quadrature_weights(n, degree)?;
        let p = coeff_count(degree);
        let mut legendre = alloc::vec![0.0; n * p];
        for j in 0..n {
            let theta = grid_theta(j, n);
            normalized_legendre_table(degree, theta.cos(), theta.sin(), &mut legendre[j * p..(j + 1) * p]);
        }
        // Angles reduced mod n so that cos/sin(m phi_k) is periodic bit for bit.
        let base_cos: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / n as f64).cos()).collect();
        let base_sin: Vec<f64> = (0..n).map(|t| (2.0 * PI * t as f64 / n as f64).sin()).collect();
        let mut cos_table = alloc::vec![0.0; (degree + 1) * n];
        let mut sin_table = alloc::vec![0.0; (degree + 1) * n];
        for m in 0..=degree {
            for k in 0..n {
                let t = (m * k) % n;
                cos_table[m * n + k] = base_cos[t];
                sin_table[m * n + k] = base_sin[t];
            }
        }
        Ok(ShTransform { n, degree, weights, legendre, cos_table, sin_table })
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff_count(&self) -> usize {
        coeff_count(self.degree)
    }

    pub fn weights(&self) -> &QuadratureWeights {
        &self.weights
    }

    /// `P_lm(cos theta_j)` (orthonormalized) for every `lm` of row `j`.
    pub fn legendre_row(&self, j: usize) -> &[f64] {
        let p = self.coeff_count();
        &self.legendre[j * p..(j + 1) * p]
    }

    fn check_signal(&self, signal: &SphericalSignal) -> Result<()> {
        if signal.n != self.n {
            return Err(Error::ShapeMismatch(alloc::format!(
                "signal resolution {} does not match transform resolution {}",
                signal.n,
                self.n
            )));
        }
        Ok(())
    }

    /// Analysis by a longitude DFT per row followed by the weighted Legendre
    /// sum over rows.
    pub fn forward(&self, signal: &SphericalSignal) -> Result<ShSpectrum> {
        self.check_signal(signal)?;
        let mut out = ShSpectrum::zeros(self.degree);
        self.forward_into(&signal.values, &mut out.coeffs);
        Ok(out)
    }

    /// Raw-slice version of [`forward`](Self::forward); `out` is overwritten.
    /// Zero samples are skipped, which makes sparse occupancy grids cheap.
    pub fn forward_into(&self, values: &[f64], out: &mut [Complex64]) {
        let (n, degree, p) = (self.n, self.degree, self.coeff_count());
        debug_assert_eq!(values.len(), n * n);
        debug_assert_eq!(out.len(), p);
        out.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        let mut row = alloc::vec![(0.0f64, 0.0f64); degree + 1];
        for j in 0..n {
            let samples = &values[j * n..(j + 1) * n];
            row.iter_mut().for_each(|r| *r = (0.0, 0.0));
            let mut any = false;
            for (k, &f) in samples.iter().enumerate() {
                if f == 0.0 {
                    continue;
                }
                any = true;
                for (m, r) in row.iter_mut().enumerate() {
                    r.0 += f * self.cos_table[m * n + k];
                    r.1 -= f * self.sin_table[m * n + k];
                }
            }
            if !any {
                continue;
            }
            let w = self.weights.cell_weight(j);
            let leg = self.legendre_row(j);
            for l in 0..=degree {
                for m in 0..=l {
                    let idx = lm_index(l, m);
                    let s = w * leg[idx];
                    out[idx].re += s * row[m].0;
                    out[idx].im += s * row[m].1;
                }
            }
        }
    }

    /// Reference analysis: the plain double sum
    /// `sum_jk w_j (2 pi / n) f(theta_j, phi_k) conj(Y_lm(theta_j, phi_k))`
    /// with every basis value evaluated from scratch.
    pub fn forward_direct(&self, signal: &SphericalSignal) -> Result<ShSpectrum> {
        self.check_signal(signal)?;
        let mut out = ShSpectrum::zeros(self.degree);
        for l in 0..=self.degree {
            for m in 0..=l {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..self.n {
                    let w = self.weights.cell_weight(j);
                    for k in 0..self.n {
                        let y = evaluate_basis(l, m, grid_theta(j, self.n), grid_phi(k, self.n))?;
                        acc += y.conj() * (w * signal.get(j, k));
                    }
                }
                out.set(l, m, acc);
            }
        }
        Ok(out)
    }

    /// Synthesis `f = sum_l sum_{|m| <= l} f_lm Y_lm` on this transform's grid.
    /// The spectrum must describe a real signal: an imaginary residue above
    /// `1e-10` is reported as an error.
    pub fn inverse(&self, spectrum: &ShSpectrum) -> Result<SphericalSignal> {
        if spectrum.degree != self.degree {
            return Err(Error::ShapeMismatch(alloc::format!(
                "spectrum degree {} does not match transform degree {}",
                spectrum.degree,
                self.degree
            )));
        }
        let mut residue = 0.0f64;
        for j in 0..self.n {
            let leg = self.legendre_row(j);
            let r: f64 = (0..=self.degree).map(|l| spectrum.get(l, 0).im * leg[lm_index(l, 0)]).sum();
            residue = residue.max(r.abs());
        }
        if residue > 1e-10 {
            return Err(Error::NonRealSpectrum(residue));
        }
        let p = self.coeff_count();
        let re: Vec<f64> = spectrum.coeffs.iter().map(|c| c.re).collect();
        let im: Vec<f64> = spectrum.coeffs.iter().map(|c| c.im).collect();
        let mut values = alloc::vec![0.0; self.n * self.n];
        debug_assert_eq!(re.len(), p);
        self.inverse_into(&re, &im, &mut values);
        SphericalSignal::new(self.n, values)
    }

    /// Real-part synthesis from split coefficient arrays; `out` is overwritten.
    /// Imaginary parts of the `m = 0` coefficients are ignored.
    pub fn inverse_into(&self, re: &[f64], im: &[f64], out: &mut [f64]) {
        let (n, degree) = (self.n, self.degree);
        let mut g = alloc::vec![(0.0f64, 0.0f64); degree + 1];
        for j in 0..n {
            let leg = self.legendre_row(j);
            for (m, gm) in g.iter_mut().enumerate() {
                let mut acc = (0.0, 0.0);
                for l in m..=degree {
                    let idx = lm_index(l, m);
                    acc.0 += re[idx] * leg[idx];
                    acc.1 += im[idx] * leg[idx];
                }
                *gm = acc;
            }
            let row = &mut out[j * n..(j + 1) * n];
            for (k, v) in row.iter_mut().enumerate() {
                let mut s = g[0].0;
                for m in 1..=degree {
                    s += 2.0 * (g[m].0 * self.cos_table[m * n + k] - g[m].1 * self.sin_table[m * n + k]);
                }
                *v = s;
            }
        }
    }

    /// Adjoint of [`inverse_into`](Self::inverse_into): accumulates
    /// `d out / d re` and `d out / d im` contracted with `grad`.
    pub fn inverse_adjoint(&self, grad: &[f64], re_grad: &mut [f64], im_grad: &mut [f64]) {
        let (n, degree) = (self.n, self.degree);
        let mut d = alloc::vec![(0.0f64, 0.0f64); degree + 1];
        for j in 0..n {
            let row = &grad[j * n..(j + 1) * n];
            d[0] = (row.iter().sum(), 0.0);
            for m in 1..=degree {
                let mut acc = (0.0, 0.0);
                for (k, &gv) in row.iter().enumerate() {
                    acc.0 += gv * self.cos_table[m * n + k];
                    acc.1 -= gv * self.sin_table[m * n + k];
                }
                d[m] = (2.0 * acc.0, 2.0 * acc.1);
            }
            let leg = self.legendre_row(j);
            for l in 0..=degree {
                for m in 0..=l {
                    let idx = lm_index(l, m);
                    re_grad[idx] += leg[idx] * d[m].0;
                    im_grad[idx] += leg[idx] * d[m].1;
                }
            }
        }
    }
}

/// One-shot forward transform; builds a throwaway [`ShTransform`].
pub fn forward(signal: &SphericalSignal, degree: usize) -> Result<ShSpectrum> {
    ShTransform::new(signal.n, degree)?.forward(signal)
}

/// One-shot inverse transform onto an `n x n` grid.
pub fn inverse(spectrum: &ShSpectrum, n: usize) -> Result<SphericalSignal> {
    ShTransform::new(n, spectrum.degree)?.inverse(spectrum)
}
