use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;
use rand::Rng as _;

use super::legendre::legendre_polynomials;
use super::*;
use crate::error::Error;
use crate::rng;

fn random_spectrum(degree: usize, rng: &mut rng::Rng) -> ShSpectrum {
    let mut s = ShSpectrum::zeros(degree);
    for l in 0..=degree {
        for m in 0..=l {
            let re = rng.random_range(-1.0..1.0);
            let im = if m == 0 { 0.0 } else { rng.random_range(-1.0..1.0) };
            s.set(l, m, Complex64::new(re, im));
        }
    }
    s
}

fn unit_vector(rng: &mut rng::Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r > 0.1 && r <= 1.0 {
            return v.map(|x| x / r);
        }
    }
}

fn direction(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Band-limited test signal: a sum of zonal Legendre bumps about fixed axes.
struct ZonalSum {
    terms: Vec<(f64, usize, [f64; 3])>,
}

impl ZonalSum {
    fn random(degree: usize, count: usize, rng: &mut rng::Rng) -> Self {
        let terms = (0..count)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0..=degree), unit_vector(rng)))
            .collect();
        ZonalSum { terms }
    }

    fn eval(&self, w: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(a, l, u)| a * legendre_polynomials(*l, w[0] * u[0] + w[1] * u[1] + w[2] * u[2])[*l])
            .sum()
    }

    /// The same function rotated: every axis mapped through `rot`.
    fn rotated(&self, rot: &[[f64; 3]; 3]) -> Self {
        let apply = |u: [f64; 3]| {
            [0, 1, 2].map(|r| rot[r][0] * u[0] + rot[r][1] * u[1] + rot[r][2] * u[2])
        };
        ZonalSum { terms: self.terms.iter().map(|&(a, l, u)| (a, l, apply(u))).collect() }
    }

    fn sample(&self, n: usize) -> SphericalSignal {
        SphericalSignal::from_fn(n, |t, p| self.eval(direction(t, p))).unwrap()
    }
}

fn rotation(alpha: f64, beta: f64, gamma: f64) -> [[f64; 3]; 3] {
    let rz = |a: f64| [[a.cos(), -a.sin(), 0.0], [a.sin(), a.cos(), 0.0], [0.0, 0.0, 1.0]];
    let ry = |b: f64| [[b.cos(), 0.0, b.sin()], [0.0, 1.0, 0.0], [-b.sin(), 0.0, b.cos()]];
    let mul = |a: [[f64; 3]; 3], b: [[f64; 3]; 3]| {
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        c
    };
    mul(mul(rz(alpha), ry(beta)), rz(gamma))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_coeff_diff(a: &ShSpectrum, b: &ShSpectrum) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn gram_matrix_is_identity() {
    let (n, degree) = (64, 9);
    let q = quadrature_weights(n, degree).unwrap();
    let p = coeff_count(degree);
    let mut basis = alloc::vec![Complex64::new(0.0, 0.0); p * n * n];
    for l in 0..=degree {
        for m in 0..=l {
            for j in 0..n {
                for k in 0..n {
                    basis[lm_index(l, m) * n * n + j * n + k] =
                        evaluate_basis(l, m, grid_theta(j, n), grid_phi(k, n)).unwrap();
                }
            }
        }
    }
    let mut worst = 0.0f64;
    for a in 0..p {
        for b in 0..p {
            let mut g = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let w = q.cell_weight(j);
                for k in 0..n {
                    g += basis[a * n * n + j * n + k] * basis[b * n * n + j * n + k].conj() * w;
                }
            }
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    assert!(worst < 1e-10, "gram deviation {worst}");
}

#[test]
fn y21_orthonormal_under_quadrature() {
    let q = quadrature_weights(64, 9).unwrap();
    let mut s = 0.0;
    for j in 0..64 {
        for k in 0..64 {
            s += q.cell_weight(j) * evaluate_basis(2, 1, grid_theta(j, 64), grid_phi(k, 64)).unwrap().norm_sqr();
        }
    }
    assert!((s - 1.0).abs() < 1e-10);
}

#[test]
fn constant_and_zero_signals() {
    let t = ShTransform::new(64, 9).unwrap();
    let one = SphericalSignal::new(64, alloc::vec![1.0; 64 * 64]).unwrap();
    let s = t.forward(&one).unwrap();
    assert!((s.get(0, 0).re - 2.0 * PI.sqrt()).abs() < 1e-10);
    assert!(s.coeffs().iter().skip(1).all(|c| c.norm() < 1e-10));

    let zero = t.forward(&SphericalSignal::zeros(64).unwrap()).unwrap();
    assert!(zero.coeffs().iter().all(|c| c.norm() == 0.0));

    let mut spec = ShSpectrum::zeros(9);
    spec.set(0, 0, Complex64::new(2.0 * PI.sqrt(), 0.0));
    let back = t.inverse(&spec).unwrap();
    assert!(back.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn pure_y32_signal() {
    // 2 Re Y_3^2 = Y_3^2 + Y_3^{-2} has f_32 = 1.
    let f = |t: f64, p: f64| 2.0 * evaluate_basis(3, 2, t, p).unwrap().re;
    let signal = SphericalSignal::from_fn(64, f).unwrap();
    let s = forward(&signal, 9).unwrap();
    for l in 0..=9 {
        for m in 0..=l {
            let expect = if (l, m) == (3, 2) { 1.0 } else { 0.0 };
            assert!((s.get(l, m) - expect).norm() < 1e-10, "({l},{m}) = {}", s.get(l, m));
        }
    }
    // sqrt(2) Re Y_3^2 carries unit energy at degree 3.
    let scaled = SphericalSignal::from_fn(64, |t, p| f(t, p) / 2f64.sqrt()).unwrap();
    let d = descriptor_f2(&[forward(&scaled, 9).unwrap()]).unwrap();
    for (l, v) in d.values.iter().enumerate() {
        let expect = if l == 3 { 1.0 } else { 0.0 };
        assert!((v - expect).abs() < 1e-10);
    }
}

#[test]
fn round_trips_and_parseval() {
    let t = ShTransform::new(64, 9).unwrap();
    let mut r = rng::from_seed(1);
    for _ in 0..10 {
        let spec = random_spectrum(9, &mut r);
        let signal = t.inverse(&spec).unwrap();
        let back = t.forward(&signal).unwrap();
        assert!(max_coeff_diff(&spec, &back) < 1e-10);
        let again = t.inverse(&back).unwrap();
        assert!(max_abs_diff(signal.values(), again.values()) < 1e-10);

        let spatial: f64 = (0..64)
            .flat_map(|j| (0..64).map(move |k| (j, k)))
            .map(|(j, k)| t.weights().cell_weight(j) * signal.get(j, k).powi(2))
            .sum();
        let spectral: f64 = (0..=9).map(|l| spec.degree_energy(l).powi(2)).sum();
        assert!(((spatial - spectral) / spectral).abs() < 1e-9);
    }
}

#[test]
fn fast_and_direct_forward_agree() {
    let t = ShTransform::new(16, 4).unwrap();
    let mut r = rng::from_seed(2);
    let values = (0..256).map(|_| r.random_range(0.0..3.0)).collect();
    let signal = SphericalSignal::new(16, values).unwrap();
    let a = t.forward(&signal).unwrap();
    let b = t.forward_direct(&signal).unwrap();
    assert!(max_coeff_diff(&a, &b) < 1e-12);
}

#[test]
fn inverse_is_linear() {
    let t = ShTransform::new(32, 9).unwrap();
    let mut r = rng::from_seed(3);
    let s1 = random_spectrum(9, &mut r);
    let s2 = random_spectrum(9, &mut r);
    let (a, b) = (0.7, -1.3);
    let combo: Vec<Complex64> =
        s1.coeffs().iter().zip(s2.coeffs()).map(|(x, y)| x * a + y * b).collect();
    let lhs = t.inverse(&ShSpectrum::from_coeffs(9, combo).unwrap()).unwrap();
    let f1 = t.inverse(&s1).unwrap();
    let f2 = t.inverse(&s2).unwrap();
    let rhs: Vec<f64> = f1.values().iter().zip(f2.values()).map(|(x, y)| a * x + b * y).collect();
    assert!(max_abs_diff(lhs.values(), &rhs) < 1e-12);
}

#[test]
fn inverse_adjoint_matches_inverse() {
    let t = ShTransform::new(20, 9).unwrap();
    let mut r = rng::from_seed(4);
    let p = t.coeff_count();
    let re: Vec<f64> = (0..p).map(|_| r.random_range(-1.0..1.0)).collect();
    let im: Vec<f64> = (0..p).map(|_| r.random_range(-1.0..1.0)).collect();
    let g: Vec<f64> = (0..400).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut out = alloc::vec![0.0; 400];
    t.inverse_into(&re, &im, &mut out);
    let lhs: f64 = out.iter().zip(&g).map(|(a, b)| a * b).sum();
    let (mut gre, mut gim) = (alloc::vec![0.0; p], alloc::vec![0.0; p]);
    t.inverse_adjoint(&g, &mut gre, &mut gim);
    let rhs: f64 = (0..p).map(|i| gre[i] * re[i] + gim[i] * im[i]).sum();
    assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
}

#[test]
fn inverse_rejects_complex_zonal_terms() {
    let mut spec = ShSpectrum::zeros(3);
    spec.set(2, 0, Complex64::new(0.0, 1.0));
    assert!(matches!(inverse(&spec, 8), Err(Error::NonRealSpectrum(_))));
}

#[test]
fn bandwidth_is_enforced() {
    assert!(matches!(ShTransform::new(16, 9), Err(Error::Bandwidth { .. })));
    let s = SphericalSignal::zeros(16).unwrap();
    assert!(forward(&s, 8).is_err());
    assert!(SphericalSignal::new(7, alloc::vec![0.0; 49]).is_err());
}

#[test]
fn descriptor_lengths_and_zero_input() {
    let zeros: Vec<ShSpectrum> = (0..7).map(|_| ShSpectrum::zeros(9)).collect();
    let f1 = descriptor_f1(&zeros).unwrap();
    let f2 = descriptor_f2(&zeros).unwrap();
    assert_eq!(f1.values.len(), 385);
    assert_eq!(f2.values.len(), 70);
    assert!(f1.values.iter().chain(&f2.values).all(|&v| v == 0.0));
    let mixed = [ShSpectrum::zeros(9), ShSpectrum::zeros(8)];
    assert!(matches!(descriptor_f1(&mixed), Err(Error::ShapeMismatch(_))));
}

#[test]
fn f1_invariant_under_grid_rotation() {
    let t = ShTransform::new(64, 9).unwrap();
    let mut r = rng::from_seed(5);
    let values = (0..64 * 64).map(|_| if r.random_bool(0.1) { r.random_range(1.0..4.0f64).floor() } else { 0.0 }).collect();
    let signal = SphericalSignal::new(64, values).unwrap();
    let base = descriptor_f1(&[t.forward(&signal).unwrap()]).unwrap();
    for shift in [1, 5, 17, 63] {
        let rotated = descriptor_f1(&[t.forward(&signal.shift_phi(shift)).unwrap()]).unwrap();
        assert!(max_abs_diff(&base.values, &rotated.values) < 1e-12);
    }
}

#[test]
fn f2_invariant_under_arbitrary_rotation() {
    let t = ShTransform::new(64, 9).unwrap();
    let mut r = rng::from_seed(6);
    for _ in 0..5 {
        let f = ZonalSum::random(9, 6, &mut r);
        let rot = rotation(r.random_range(0.0..2.0 * PI), r.random_range(0.0..PI), r.random_range(0.0..2.0 * PI));
        let a = descriptor_f2(&[t.forward(&f.sample(64)).unwrap()]).unwrap();
        let b = descriptor_f2(&[t.forward(&f.rotated(&rot).sample(64)).unwrap()]).unwrap();
        assert!(max_abs_diff(&a.values, &b.values) < 1e-8);
        assert!(a.values.iter().all(|&v| v >= 0.0));
    }
}
