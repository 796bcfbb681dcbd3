use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use super::legendre::legendre_polynomials;
use crate::error::{Error, Result};

/// Colatitude of row `j` on the pole-free equiangular grid.
#[inline]
pub fn grid_theta(j: usize, n: usize) -> f64 {
    PI * (j as f64 + 0.5) / n as f64
}

#[inline]
pub fn grid_phi(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

/// Per-row latitude weights `w_j` for the grid `theta_j = pi (j + 1/2) / n`.
///
/// Together with the uniform longitude factor `2 pi / n` they integrate every
/// zonal polynomial of degree `<= 2 * degree` exactly:
/// `sum_j w_j P_d(cos theta_j) = 2 delta_{d0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureWeights {
    n: usize,
    degree: usize,
    w: Vec<f64>,
}

impl QuadratureWeights {
    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// `w_j * 2 pi / n`: the area element of one cell in row `j`.
    #[inline]
    pub fn cell_weight(&self, j: usize) -> f64 {
        self.w[j] * 2.0 * PI / self.n as f64
    }

    /// Total measure of the sphere under the rule; `4 pi` up to rounding.
    pub fn total_measure(&self) -> f64 {
        (0..self.n).map(|j| self.cell_weight(j)).sum::<f64>() * self.n as f64
    }
}

/// Minimum-norm weights satisfying the `2 * degree + 1` Legendre moment
/// conditions on the `n` grid rows.
pub fn quadrature_weights(n: usize, degree: usize) -> Result<QuadratureWeights> {
    if n < 2 * (degree + 1) {
        return Err(Error::Bandwidth { resolution: n, degree });
    }
    let moments = 2 * degree + 1;
    // Rows scaled by sqrt((2d+1)/2) to keep the normal matrix well conditioned.
    let mut a = alloc::vec![0.0; moments * n];
    for j in 0..n {
        let p = legendre_polynomials(moments - 1, grid_theta(j, n).cos());
        for d in 0..moments {
            a[d * n + j] = p[d] * ((2 * d + 1) as f64 / 2.0).sqrt();
        }
    }
    let mut rhs = alloc::vec![0.0; moments];
    rhs[0] = 2.0 * 0.5f64.sqrt();

    let mut gram = alloc::vec![0.0; moments * moments];
    for r in 0..moments {
        for c in 0..=r {
            let v: f64 = (0..n).map(|j| a[r * n + j] * a[c * n + j]).sum();
            gram[r * moments + c] = v;
            gram[c * moments + r] = v;
        }
    }

    let apply_transpose = |y: &[f64]| -> Vec<f64> {
        (0..n).map(|j| (0..moments).map(|d| a[d * n + j] * y[d]).sum()).collect()
    };

    let y = solve_dense(gram.clone(), rhs.clone(), moments)?;
    let mut w = apply_transpose(&y);
    // One step of iterative refinement.
    let residual: Vec<f64> = (0..moments)
        .map(|d| rhs[d] - (0..n).map(|j| a[d * n + j] * w[j]).sum::<f64>())
        .collect();
    let dy = solve_dense(gram, residual, moments)?;
    for (wj, dj) in w.iter_mut().zip(apply_transpose(&dy)) {
        *wj += dj;
    }
    Ok(QuadratureWeights { n, degree, w })
}

/// Gaussian elimination with partial pivoting on a row-major square system.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, size: usize) -> Result<Vec<f64>> {
    let scale = (0..size).map(|i| a[i * size + i].abs()).fold(0.0, f64::max);
    for col in 0..size {
        let pivot = (col..size)
            .max_by(|&i, &j| a[i * size + col].abs().total_cmp(&a[j * size + col].abs()))
            .unwrap_or(col);
        if !(a[pivot * size + col].abs() > 1e-12 * scale) {
            return Err(Error::RankDeficient);
        }
        if pivot != col {
            for k in 0..size {
                a.swap(col * size + k, pivot * size + k);
            }
            b.swap(col, pivot);
        }
        let d = a[col * size + col];
        for row in (col + 1)..size {
            let f = a[row * size + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..size {
                a[row * size + k] -= f * a[col * size + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = alloc::vec![0.0; size];
    for row in (0..size).rev() {
        let s: f64 = ((row + 1)..size).map(|k| a[row * size + k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row * size + row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_and_total_measure() {
        for (n, degree) in [(64, 9), (16, 4), (20, 9), (8, 2), (128, 20)] {
            let q = quadrature_weights(n, degree).unwrap();
            assert!((q.total_measure() - 4.0 * PI).abs() < 1e-10);
            for d in 0..=2 * degree {
                let s: f64 = (0..n)
                    .map(|j| q.weights()[j] * legendre_polynomials(d, grid_theta(j, n).cos())[d])
                    .sum();
                let target = if d == 0 { 2.0 } else { 0.0 };
                assert!((s - target).abs() < 1e-12, "n={n} L={degree} d={d}: {s}");
            }
        }
    }

    #[test]
    fn odd_moment_vanishes() {
        let q = quadrature_weights(64, 9).unwrap();
        let s: f64 = (0..64).map(|j| q.weights()[j] * grid_theta(j, 64).cos()).sum();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn bandwidth_violation() {
        assert_eq!(
            quadrature_weights(18, 9),
            Err(Error::Bandwidth { resolution: 18, degree: 9 })
        );
    }
}
