//! Dense univariate polynomial helpers.
//!
//! Coefficients are stored in descending powers, matching the transfer
//! function convention used throughout the crate. Root finding goes through
//! the companion matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Remove leading coefficients that are negligible relative to the largest one.
pub fn trim_leading(coeffs: &[f64]) -> Vec<f64> {
    let max = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max == 0.0 {
        return vec![0.0];
    }
    let tol = max * 1e-12;
    let start = coeffs
        .iter()
        .position(|c| c.abs() > tol)
        .unwrap_or(coeffs.len() - 1);
    coeffs[start..].to_vec()
}

pub fn degree(coeffs: &[f64]) -> usize {
    trim_leading(coeffs).len() - 1
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().rev().enumerate() {
        out[n - 1 - i] += ai;
    }
    for (i, &bi) in b.iter().rev().enumerate() {
        out[n - 1 - i] += bi;
    }
    out
}

pub fn scale(a: &[f64], k: f64) -> Vec<f64> {
    a.iter().map(|c| c * k).collect()
}

/// Horner evaluation at a complex point.
pub fn eval(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

pub fn eval_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Integer power of (binomial) `[1, c]`, i.e. (x + c)^n.
pub fn binomial_power(c: f64, n: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..n {
        out = mul(&out, &[1.0, c]);
    }
    out
}

/// Roots via companion-matrix eigenvalues. Returns an empty vector for
/// constant polynomials.
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let c = trim_leading(coeffs);
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[0];
    let monic: Vec<f64> = c.iter().map(|x| x / lead).collect();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for j in 0..n {
        m[(0, j)] = -monic[j + 1];
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// Rebuild a real-coefficient monic polynomial from a conjugate-closed root set.
pub fn from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
        for (i, &c) in acc.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        acc = next;
    }
    acc.iter().map(|c| c.re).collect()
}
