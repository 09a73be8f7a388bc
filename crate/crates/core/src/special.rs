// SPDX-License-Identifier: Apache-2.0

//! Special functions and adaptive quadrature.
//!
//! * [`integrate`]: adaptive 15-point Gauss–Kronrod on finite intervals, with
//!   the substitution `t = a − ln(1 − u)` for an infinite upper limit.
//! * [`elliptic_k`]: complete elliptic integral of the first kind with
//!   modulus `σ`, by quadrature for `σ ≤ 0.9` and by the logarithmic series in
//!   the complementary modulus above that.
//! * [`bessel_k0`], [`bessel_k0_prime`]: `K₀` and `K₀' = −K₁` from the
//!   `cosh` integral representation, switching to the Hankel asymptotic series
//!   for large argument.
//! * [`zeta_const`], [`euler_gamma`]: compiled-in constants. The tests
//!   reproduce them from their defining series.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::math;

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-12, max_subdivisions: 4000 }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions < 1 {
            return Err(Error::Domain("quadrature tolerances must be positive"));
        }
        Ok(Self { abs_tol, rel_tol, max_subdivisions })
    }
}

// Kronrod abscissae on [0, 1] (the interval is symmetric); even indices 1,3,5
// are the 7-point Gauss nodes, index 7 is the centre.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let (f1, f2) = (f(c - dx), f(c + dx));
        k += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    let error = ((k - g) * h).abs();
    Segment { a, b, value: k * h, error }
}

/// Adaptive integration of `f` over `[a, b]`; `b` may be `+∞`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    integrate_with_error(f, a, b, cfg).map(|(v, _)| v)
}

/// As [`integrate`], also returning the final error estimate.
pub fn integrate_with_error<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    if a.is_nan() || b.is_nan() || a.is_infinite() {
        return Err(Error::Domain("integration limits"));
    }
    if b == f64::INFINITY {
        // t = a + s(1 − u)/u maps algebraic tails t^{-p}, p ≥ 2, to bounded
        // integrands on (0, 1]; s = a for a > 0 makes it t = a/u.
        let s = if a > 0.0 { a } else { 1.0 };
        let g = move |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let t = a + s * (1.0 - u) / u;
            if !t.is_finite() {
                return 0.0;
            }
            let v = f(t);
            if v == 0.0 {
                0.0
            } else {
                v * s / (u * u)
            }
        };
        return adaptive(g, &[0.0, 1.0], cfg);
    }
    if b.is_infinite() {
        return Err(Error::Domain("only +inf is supported as an infinite limit"));
    }
    if a == b {
        return Ok((0.0, 0.0));
    }
    if b < a {
        return adaptive(f, &[b, a], cfg).map(|(v, e)| (-v, e));
    }
    adaptive(f, &[a, b], cfg)
}

/// Adaptive integration over consecutive intervals `[p₀,p₁], [p₁,p₂], …`.
/// Breakpoints let the caller place known peaks or kinks on segment ends.
pub fn integrate_breaks<F: FnMut(f64) -> f64>(f: F, points: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] > w[0])) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Domain("breakpoints must be finite and strictly increasing"));
    }
    adaptive(f, points, cfg).map(|(v, _)| v)
}

fn adaptive<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let mut segs: Vec<Segment> = points.windows(2).map(|w| gk15(&mut f, w[0], w[1])).collect();
    loop {
        let (total, err) = segs.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if !total.is_finite() {
            return Err(Error::Accuracy { estimate: total, error: f64::INFINITY });
        }
        let target = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if err <= target {
            return Ok((total, err));
        }
        if segs.len() >= cfg.max_subdivisions {
            return Err(Error::Accuracy { estimate: total, error: err });
        }
        let (idx, worst) =
            segs.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let s = segs[idx];
        let mid = 0.5 * (s.a + s.b);
        if !(mid > s.a && mid < s.b) || worst == 0.0 {
            // Segment reached floating-point resolution.
            return Err(Error::Accuracy { estimate: total, error: err });
        }
        segs[idx] = gk15(&mut f, s.a, mid);
        segs.push(gk15(&mut f, mid, s.b));
    }
}

/// Modulus above which [`elliptic_k`] switches to the logarithmic series.
pub const ELLIPTIC_SERIES_THRESHOLD: f64 = 0.9;

/// Complete elliptic integral of the first kind,
/// `K(σ) = ∫₀¹ dt / √((1 − t²)(1 − σ²t²))`, for `0 ≤ σ < 1`.
pub fn elliptic_k(sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) || !(sigma < 1.0) {
        return Err(Error::Domain("elliptic modulus must lie in [0, 1)"));
    }
    if sigma <= ELLIPTIC_SERIES_THRESHOLD {
        let s2 = sigma * sigma;
        let cfg = QuadratureConfig { abs_tol: 1e-16, rel_tol: 1e-15, max_subdivisions: 200 };
        return integrate(|phi| 1.0 / math::sqrt(1.0 - s2 * math::sq(math::sin(phi))), 0.0, FRAC_PI_2, &cfg);
    }
    let kp2 = (1.0 - sigma) * (1.0 + sigma);
    Ok(elliptic_k_log_series(kp2))
}

/// `K` as a function of the squared complementary modulus `σ'² = 1 − σ²`:
/// `Σ_ℓ C(−½, ℓ)² σ'^{2ℓ} [ln(4/σ') − b_ℓ]`, `b_ℓ = b_{ℓ−1} + 2/((2ℓ−1)2ℓ)`.
pub fn elliptic_k_log_series(kp2: f64) -> f64 {
    let lead = math::ln(4.0) - 0.5 * math::ln(kp2);
    let mut coef = 1.0; // C(-1/2, l)^2
    let mut b = 0.0;
    let mut pw = 1.0;
    let mut sum = lead;
    for l in 1..400 {
        let lf = l as f64;
        let c = (2.0 * lf - 1.0) / (2.0 * lf);
        coef *= c * c;
        b += 2.0 / ((2.0 * lf - 1.0) * (2.0 * lf));
        pw *= kp2;
        let term = coef * pw * (lead - b);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Argument above which the Bessel functions use the asymptotic series.
pub const BESSEL_ASYMPTOTIC_FROM: f64 = 30.0;
const BESSEL_TOL: f64 = 1e-16;

fn bessel_integral(t: f64, order1: bool) -> Result<f64> {
    // ∫₀^U e^{−t(cosh u − 1)} (cosh u)^ν du, truncated where t(cosh U − 1) > 40 + |ln tol|.
    let cut = 40.0 + math::ln(BESSEL_TOL).abs();
    let upper = math::acosh(1.0 + cut / t);
    let cfg = QuadratureConfig { abs_tol: 1e-300, rel_tol: 1e-14, max_subdivisions: 500 };
    let f = |u: f64| {
        let c = math::cosh(u);
        let e = math::exp(-t * (c - 1.0));
        if order1 {
            e * c
        } else {
            e
        }
    };
    Ok(integrate(f, 0.0, upper, &cfg)? * math::exp(-t))
}

fn bessel_asymptotic(t: f64, nu: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = term * (mu - math::sq(2.0 * kf - 1.0)) / (kf * 8.0 * t);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    math::sqrt(PI / (2.0 * t)) * math::exp(-t) * sum
}

/// Modified Bessel function `K₀(t) = ∫₀^∞ e^{−t cosh u} du`, `t > 0`.
pub fn bessel_k0(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain("bessel_k0 needs t > 0"));
    }
    if t > BESSEL_ASYMPTOTIC_FROM {
        return Ok(bessel_asymptotic(t, 0.0));
    }
    bessel_integral(t, false)
}

/// Derivative `K₀'(t) = −∫₀^∞ e^{−t cosh u} cosh u du = −K₁(t)`, `t > 0`.
pub fn bessel_k0_prime(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain("bessel_k0_prime needs t > 0"));
    }
    if t > BESSEL_ASYMPTOTIC_FROM {
        return Ok(-bessel_asymptotic(t, 1.0));
    }
    Ok(-bessel_integral(t, true)?)
}

/// ζ(3) (Apéry's constant).
pub const ZETA3: f64 = 1.202_056_903_159_594_285_399_738_161_511_449_990_8;
/// ζ(5).
pub const ZETA5: f64 = 1.036_927_755_143_369_926_331_365_486_457_034_168_1;
/// Euler's constant γ₀.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431;

/// `ζ(s)` for `s ∈ {3, 5}`.
pub fn zeta_const(s: u32) -> Result<f64> {
    match s {
        3 => Ok(ZETA3),
        5 => Ok(ZETA5),
        _ => Err(Error::Unsupported("zeta_const is provided for s = 3 and s = 5 only")),
    }
}

/// Euler's constant `γ₀ = lim (Σ_{j≤n} 1/j − ln n)`.
pub fn euler_gamma() -> f64 {
    EULER_GAMMA
}
