// SPDX-License-Identifier: Apache-2.0

//! Finite cosecant-power sums and their asymptotics.
//!
//! With `t_j = (x² + sin²(jπ/n))^{-k/2}` and `n` even:
//!
//! | variant   | definition                                  |
//! |-----------|---------------------------------------------|
//! | `Odd`     | `S^o_k = Σ_{j=0}^{n/2−1} t_{2j+1}`          |
//! | `Even`    | `S^e_k = Σ_{j=0}^{n/2−1} t_{2j}`            |
//! | `EvenHat` | `Ŝ^e_k = Σ_{j=1}^{n/2−1} t_{2j}`            |
//! | `Alt`     | `S_k = S^e_k − S^o_k = Σ_{j=0}^{n−1} (−1)^j t_j` |
//! | `AltHat`  | `Ŝ_k = S^o_k − Ŝ^e_k = Σ_{j=1}^{n−1} (−1)^{j+1} t_j` |
//!
//! [`sum_direct`] adds the terms with Neumaier compensation and, when the
//! alternating sum cancels badly, re-evaluates it in multiple precision.
//! [`s1_contour`] evaluates `S_1(n, x)` from its integral representation and
//! [`s_asym`] gives the exponential asymptotics for `nx ≫ 1`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math;
use crate::special::{self, QuadratureConfig, ZETA3, ZETA5};

/// Neumaier's improved Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Which of the five sums a [`SumSpec`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Odd,
    Even,
    EvenHat,
    Alt,
    AltHat,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Odd, Variant::Even, Variant::EvenHat, Variant::Alt, Variant::AltHat];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Odd => "odd",
            Variant::Even => "even",
            Variant::EvenHat => "even_hat",
            Variant::Alt => "alt",
            Variant::AltHat => "alt_hat",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == s)
    }

    fn is_alternating(self) -> bool {
        matches!(self, Variant::Alt | Variant::AltHat)
    }

    /// `(j, sign)` pairs of the terms making up the sum.
    fn terms(self, n: usize) -> Vec<(usize, f64)> {
        match self {
            Variant::Odd => (0..n / 2).map(|j| (2 * j + 1, 1.0)).collect(),
            Variant::Even => (0..n / 2).map(|j| (2 * j, 1.0)).collect(),
            Variant::EvenHat => (1..n / 2).map(|j| (2 * j, 1.0)).collect(),
            Variant::Alt => (0..n).map(|j| (j, if j % 2 == 0 { 1.0 } else { -1.0 })).collect(),
            Variant::AltHat => (1..n).map(|j| (j, if j % 2 == 1 { 1.0 } else { -1.0 })).collect(),
        }
    }
}

/// A validated description of one finite sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumSpec {
    variant: Variant,
    k: u32,
    n: usize,
    x: f64,
}

impl SumSpec {
    pub fn new(variant: Variant, k: u32, n: usize, x: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::Domain("n must be even and at least 4"));
        }
        if k % 2 == 0 {
            return Err(Error::Domain("exponent k must be odd and positive"));
        }
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain("offset x must be finite and nonnegative"));
        }
        if x == 0.0 && matches!(variant, Variant::Even | Variant::Alt) {
            return Err(Error::Domain("the j = 0 term is singular at x = 0"));
        }
        Ok(Self { variant, k, n, x })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn x(&self) -> f64 {
        self.x
    }
}

#[inline]
fn term(j: usize, n: usize, k: u32, x2: f64) -> f64 {
    let s = math::sin_pi_frac(j as i64, n as i64);
    let base = x2 + s * s;
    let r = math::sqrt(base);
    let mut p = r;
    for _ in 0..k / 2 {
        p *= base;
    }
    1.0 / p
}

/// Outcome of [`sum_direct_detailed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectSum {
    pub value: f64,
    /// `Σ |t_j|`, the size of the terms being cancelled.
    pub abs_sum: f64,
    /// Binary precision used when the sum was re-evaluated, if it was.
    pub extended_bits: Option<usize>,
}

/// Condition number `Σ|t_j| / |S|` above which an alternating sum is re-evaluated
/// in multiple precision.
pub const CANCELLATION_LIMIT: f64 = 64.0;

/// Double-precision compensated sum and `Σ|t_j|`. No accuracy guarantee for
/// alternating variants; see [`sum_direct`].
pub fn sum_f64(spec: &SumSpec) -> (f64, f64) {
    let x2 = spec.x * spec.x;
    let mut acc = NeumaierSum::default();
    let mut abs = NeumaierSum::default();
    for (j, sign) in spec.variant.terms(spec.n) {
        let t = term(j, spec.n, spec.k, x2);
        acc.add(sign * t);
        abs.add(t);
    }
    (acc.value(), abs.value())
}

/// The exact finite sum to double accuracy, with diagnostics.
pub fn sum_direct_detailed(spec: &SumSpec) -> Result<DirectSum> {
    let (value, abs_sum) = sum_f64(spec);
    if !spec.variant.is_alternating() || abs_sum <= CANCELLATION_LIMIT * value.abs() {
        return Ok(DirectSum { value, abs_sum, extended_bits: None });
    }
    let terms = spec.variant.terms(spec.n);
    let (v, bits) = crate::hp::signed_sum_f64(spec.n, spec.k, spec.x, &terms);
    if !v.is_finite() {
        return Err(Error::Accuracy { estimate: value, error: abs_sum });
    }
    Ok(DirectSum { value: v, abs_sum, extended_bits: Some(bits) })
}

/// The exact finite sum described by `spec`.
pub fn sum_direct(spec: &SumSpec) -> Result<f64> {
    sum_direct_detailed(spec).map(|d| d.value)
}

/// Fast double-precision evaluation used inside kernel and energy formulas
/// where the cancellation is mild. Panics never; invalid input yields NaN.
pub fn sum_fast(variant: Variant, k: u32, n: usize, x: f64) -> f64 {
    match SumSpec::new(variant, k, n, x) {
        Ok(s) => sum_f64(&s).0,
        Err(_) => f64::NAN,
    }
}

/// `S_1(n, x)` from `(2n/π) ∫₀^∞ csch(n·asinh(x cosh u)) / √(1 + x² cosh² u) du`,
/// the form obtained from the contour representation after `sinh t = x cosh u`.
pub fn s1_contour(n: usize, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain("contour representation needs x > 0"));
    }
    if n < 2 || n % 2 != 0 {
        return Err(Error::Domain("n must be even"));
    }
    let nf = n as f64;
    let t0 = math::asinh(x);
    // Beyond `upper` the integrand is below e^{-60} times its value at u = 0.
    let upper = math::acosh(math::sinh(t0 + 60.0 / nf) / x).max(1e-3);
    let f = |u: f64| {
        let c = math::cosh(u);
        let y = nf * math::asinh(x * c);
        let csch = 2.0 * math::exp(-y) / -math::expm1(-2.0 * y);
        csch / math::sqrt(1.0 + x * x * c * c)
    };
    let cfg = QuadratureConfig { abs_tol: 1e-300, rel_tol: 1e-13, max_subdivisions: 2000 };
    Ok(2.0 * nf / PI * special::integrate(f, 0.0, upper, &cfg)?)
}

/// `nx` below which [`s_asym`] flags its result as outside the asymptotic regime.
pub const ASYMPTOTIC_REGIME_NX: f64 = 5.0;

/// An asymptotic value with a regime flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotic {
    pub value: f64,
    /// `false` when `nx < 5`.
    pub in_regime: bool,
}

/// Leading exponential asymptotics of `S_k(n, x)` for `k ∈ {1, 3, 5}`.
pub fn s_asym(k: u32, n: usize, x: f64) -> Result<Asymptotic> {
    if !(x > 0.0) {
        return Err(Error::Domain("asymptotics need x > 0"));
    }
    let nf = n as f64;
    let nx = nf * x;
    let c = math::sqrt(8.0 / PI) * math::exp(-nx);
    let value = match k {
        1 => c * nf / math::sqrt(nx),
        3 => c * nf * nf * nf / (nx * math::sqrt(nx)),
        5 => c * math::powi(nf, 5) / (3.0 * nx * nx * math::sqrt(nx)),
        _ => return Err(Error::Unsupported("asymptotics are provided for k = 1, 3, 5")),
    };
    Ok(Asymptotic { value, in_regime: nx >= ASYMPTOTIC_REGIME_NX })
}

/// Leading large-`n` terms of the zero-offset sums.
pub fn csc_asym(variant: Variant, k: u32, n: usize) -> Result<f64> {
    let nf = n as f64;
    match (variant, k) {
        (Variant::Odd, 3) => Ok(7.0 * ZETA3 * nf * nf * nf / (4.0 * PI * PI * PI)),
        (Variant::Odd, 5) => Ok(93.0 * ZETA5 * math::powi(nf, 5) / (48.0 * math::powi(PI, 5))),
        (Variant::EvenHat, 3) => Ok(ZETA3 * nf * nf * nf / (4.0 * PI * PI * PI)),
        (Variant::AltHat, 1) => Ok(nf / PI * math::ln(4.0)),
        _ => Err(Error::Unsupported("no leading term for this (variant, k)")),
    }
}

/// `Σ_{j=1}^{m−1} csc(jπ/m)`.
pub fn csc_full_sum(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain("m must be at least 2"));
    }
    Ok((1..m).map(|j| 1.0 / math::sin_pi_frac(j as i64, m as i64)).collect::<NeumaierSum>().value())
}

/// Normalised size of `S^o_k + S^e_k` for the rough bound check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoughBound {
    pub sum: f64,
    pub scale: f64,
    pub ratio: f64,
}

/// `(S^o_k + S^e_k)/(n max(|ln x|, 1))` for `k = 1`, `/(n x^{1−k})` for `k ≥ 3`.
pub fn rough_bound_check(k: u32, n: usize, x: f64) -> Result<RoughBound> {
    if !(x > 0.0) || x > 1.0 {
        return Err(Error::Domain("rough bound needs x in (0, 1]"));
    }
    let o = sum_direct(&SumSpec::new(Variant::Odd, k, n, x)?)?;
    let e = sum_direct(&SumSpec::new(Variant::Even, k, n, x)?)?;
    let nf = n as f64;
    let scale = if k == 1 { nf * math::ln(x).abs().max(1.0) } else { nf * math::powi(x, 1 - k as i32) };
    Ok(RoughBound { sum: o + e, scale, ratio: (o + e) / scale })
}

/// Value of the ring-distance sum with its range flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixSum {
    pub value: f64,
    /// `h ∈ (m^{−1/2}, 1/3)` and `θ ∈ (0, π/m)`.
    pub in_range: bool,
}

/// `Σ_{j=0}^{m−1} (h² + sin²(jπ/m − θ/2))^{−1/2}`.
pub fn appendix_h_sum(m: usize, theta: f64, h: f64) -> Result<AppendixSum> {
    if m < 1 || !(h > 0.0) {
        return Err(Error::Domain("appendix sum needs m >= 1 and h > 0"));
    }
    let mf = m as f64;
    let value = (0..m)
        .map(|j| {
            let s = math::sin(j as f64 * PI / mf - 0.5 * theta);
            1.0 / math::sqrt(h * h + s * s)
        })
        .collect::<NeumaierSum>()
        .value();
    let in_range = h > 1.0 / math::sqrt(mf) && h < 1.0 / 3.0 && theta > 0.0 && theta < PI / mf;
    Ok(AppendixSum { value, in_range })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(SumSpec::new(Variant::Alt, 1, 8, 0.0).is_err());
        assert!(SumSpec::new(Variant::Even, 1, 8, 0.0).is_err());
        assert!(SumSpec::new(Variant::AltHat, 1, 8, 0.0).is_ok());
        assert!(SumSpec::new(Variant::Odd, 2, 8, 0.1).is_err());
        assert!(SumSpec::new(Variant::Odd, 1, 7, 0.1).is_err());
    }

    #[test]
    fn names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(Variant::parse(v.name()), Some(v));
        }
    }

    #[test]
    fn csc_full_sum_m2() {
        assert!((csc_full_sum(2).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn asymptotic_regime_flag() {
        assert!(!s_asym(1, 10, 0.1).unwrap().in_regime);
        assert!(s_asym(1, 100, 0.1).unwrap().in_regime);
        assert!(s_asym(2, 100, 0.1).is_err());
    }
}
