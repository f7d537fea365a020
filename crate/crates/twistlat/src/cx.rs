//! Complex scalar, vector and matrix helpers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::intlin::IMat;

pub type C64 = Complex64;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// 2πi
pub fn two_pi_i() -> C64 {
    c(0.0, 2.0 * std::f64::consts::PI)
}

pub fn from_imat(m: &IMat) -> CMat {
    m.map(|x| r(x as f64))
}

pub fn from_ivec(v: &[i64]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|&x| r(x as f64)))
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn vmax_abs(v: &CVec) -> f64 {
    v.iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// Symmetric bilinear pairing aᵀ G b (no conjugation).
pub fn bform(g: &CMat, a: &CVec, b: &CVec) -> C64 {
    let gb = g * b;
    a.iter().zip(gb.iter()).map(|(x, y)| x * y).sum()
}

/// Relative closeness used by checks: |a−b| / max(1, |b|).
pub fn rel_err(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// Exponential of a complex number given as (re, im) pair for JSON.
pub fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}
