// SPDX-License-Identifier: Apache-2.0

//! Thin wrappers over `libm` so that the crate builds without `std`.

#![allow(dead_code)]

#[inline]
pub fn sq(x: f64) -> f64 {
    x * x
}
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn sincos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}
#[inline]
pub fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}
#[inline]
pub fn sinh(x: f64) -> f64 {
    libm::sinh(x)
}
#[inline]
pub fn asinh(x: f64) -> f64 {
    libm::asinh(x)
}
#[inline]
pub fn acosh(x: f64) -> f64 {
    libm::acosh(x)
}
#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}
#[inline]
pub fn ldexp(x: f64, e: i32) -> f64 {
    libm::ldexp(x, e)
}

/// `sin(j*pi/n)` with the argument folded into `[0, pi/2]` for accuracy.
pub fn sin_pi_frac(j: i64, n: i64) -> f64 {
    let n2 = 2 * n;
    let mut r = j.rem_euclid(n2);
    let mut sign = 1.0;
    if r >= n {
        r -= n;
        sign = -1.0;
    }
    if 2 * r > n {
        r = n - r;
    }
    sign * sin(core::f64::consts::PI * r as f64 / n as f64)
}
