//! Independent oracles for the linear (K = Λ = ζ = 0) amplifier.
//!
//! They work with the quadrature Langevin equation `v̇ = A v + noise` for
//! `v = (X, P)` and never touch the Fock-space code.

#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

/// Drift matrix for `Δ a†a + (λ/2)a†² + h.c.` damped at `kappa_bar`.
pub fn drift(delta: f64, lambda: Complex64, kappa_bar: f64) -> Matrix2<f64> {
    let (lr, li) = (lambda.re, lambda.im);
    Matrix2::new(li - kappa_bar / 2.0, delta - lr, -delta - lr, -li - kappa_bar / 2.0)
}

/// Symmetrised covariance from `A V + V Aᵀ + (κ̄/2) 1 = 0`.
pub fn covariance(delta: f64, lambda: Complex64, kappa_bar: f64) -> Matrix2<f64> {
    let a = drift(delta, lambda, kappa_bar);
    let id = Matrix2::<f64>::identity();
    // vec(AV + VAᵀ) = (I⊗A + A⊗I) vec(V), column-major vec.
    let mut k = Matrix4::<f64>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for r in 0..2 {
                for c in 0..2 {
                    k[(i * 2 + r, j * 2 + c)] += id[(i, j)] * a[(r, c)] + a[(i, j)] * id[(r, c)];
                }
            }
        }
    }
    let d = -kappa_bar / 2.0;
    let v = k.lu().solve(&Vector4::new(d, 0.0, 0.0, d)).expect("stable drift");
    Matrix2::new(v[0], v[2], v[1], v[3])
}

/// (N, M) from the quadrature covariance.
pub fn moments(delta: f64, lambda: Complex64, kappa_bar: f64) -> (f64, Complex64) {
    let v = covariance(delta, lambda, kappa_bar);
    let n = (v[(0, 0)] + v[(1, 1)] - 1.0) / 2.0;
    let m = Complex64::new((v[(0, 0)] - v[(1, 1)]) / 2.0, v[(0, 1)]);
    (n, m)
}

/// Zero-frequency scattering matrix `v_out = S v_in` of the signal port.
pub fn scattering(delta: f64, lambda: Complex64, kappa: f64, gamma: f64) -> Matrix2<f64> {
    let a = drift(delta, lambda, kappa + gamma);
    -a.try_inverse().expect("stable drift") * kappa - Matrix2::identity()
}

/// Minimum output quadrature variance for vacuum inputs (lossless port).
pub fn min_output_variance(delta: f64, lambda: Complex64, kappa: f64) -> f64 {
    let s = scattering(delta, lambda, kappa, 0.0);
    let out = s * s.transpose() * 0.5;
    out.symmetric_eigenvalues().min()
}
