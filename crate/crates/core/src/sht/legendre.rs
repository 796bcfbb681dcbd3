use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use crate::error::{invalid, Result};

/// Offset of `(l, m)` in triangular `m >= 0` storage.
#[inline]
pub fn lm_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Number of `(l, m)` pairs with `0 <= m <= l <= degree`.
#[inline]
pub fn coeff_count(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Fills `out[lm_index(l, m)]` with the orthonormalized associated Legendre
/// values `sqrt((2l+1)(l-m)! / (4 pi (l+m)!)) P_l^m(x)`, Condon-Shortley
/// phase included, for all `l <= degree`.
///
/// `sin_theta` must equal `sqrt(1 - x^2)`; it is passed separately so callers
/// holding an angle avoid the cancellation in `1 - x^2` near the poles.
pub(crate) fn normalized_legendre_table(degree: usize, x: f64, sin_theta: f64, out: &mut [f64]) {
    debug_assert!(out.len() >= coeff_count(degree));
    // Sectoral terms: P_mm = -sqrt((2m+1)/(2m)) sin P_{m-1,m-1}.
    let mut pmm = 0.5 / PI.sqrt();
    for m in 0..=degree {
        if m > 0 {
            let mf = m as f64;
            pmm *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_theta;
        }
        out[lm_index(m, m)] = pmm;
        if m == degree {
            break;
        }
        let mf = m as f64;
        let mut p_prev = pmm;
        let mut p_curr = (2.0 * mf + 3.0).sqrt() * x * pmm;
        out[lm_index(m + 1, m)] = p_curr;
        for l in (m + 2)..=degree {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            let p_next = a * (x * p_curr - b * p_prev);
            out[lm_index(l, m)] = p_next;
            p_prev = p_curr;
            p_curr = p_next;
        }
    }
}

/// Orthonormalized associated Legendre function of degree `l`, order `m`.
pub fn assoc_legendre_normalized(l: usize, m: usize, x: f64) -> Result<f64> {
    if m > l {
        return Err(invalid("order m exceeds degree l"));
    }
    if !(x.abs() <= 1.0) {
        return Err(invalid("|x| must be <= 1"));
    }
    let s = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut table = alloc::vec![0.0; coeff_count(l)];
    normalized_legendre_table(l, x, s, &mut table);
    Ok(table[lm_index(l, m)])
}

/// `Y_l^m(theta, phi)` for `0 <= m <= l`. Negative orders follow from
/// `Y_l^{-m} = (-1)^m conj(Y_l^m)`.
pub fn evaluate_basis(l: usize, m: usize, theta: f64, phi: f64) -> Result<Complex64> {
    if m > l {
        return Err(invalid("order m exceeds degree l"));
    }
    let mut table = alloc::vec![0.0; coeff_count(l)];
    normalized_legendre_table(l, theta.cos(), theta.sin().abs(), &mut table);
    let (s, c) = (m as f64 * phi).sin_cos();
    Ok(Complex64::new(c, s) * table[lm_index(l, m)])
}

/// Ordinary Legendre polynomials `P_0(x) ..= P_degree(x)`.
pub(crate) fn legendre_polynomials(degree: usize, x: f64) -> Vec<f64> {
    let mut p = alloc::vec![0.0; degree + 1];
    p[0] = 1.0;
    if degree >= 1 {
        p[1] = x;
    }
    for n in 2..=degree {
        let nf = n as f64;
        p[n] = ((2.0 * nf - 1.0) * x * p[n - 1] - (nf - 1.0) * p[n - 2]) / nf;
    }
    p
}
