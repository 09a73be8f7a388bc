// SPDX-License-Identifier: Apache-2.0

//! Sector interaction kernels.
//!
//! * `γ(z,p)`: the alternating image sum of Newtonian kernels without the
//!   identity term,
//! * `H₀(z,p)`: the regular part of the Green's function of the unit ball and
//!   its odd extension `H₀ᵉ`,
//! * the placed bubble `Q_A` and its image sum `T_A`.
//!
//! At the diagonal `z = p = b` every kernel value, directional derivative and
//! mixed second derivative is available three ways: the direct image sum
//! (with finite differences for derivatives), an exact trigonometric
//! resummation, and an asymptotic form in the cosecant sums of [`crate::sums`].

use crate::crown::{theta_star, Profile, ProfileHandle};
use crate::error::{Error, Result};
use crate::geometry::{bilinear, conjugate_by_rotation, rotate, Mat3, Point3, SectorConfig};
use crate::math;
use crate::sums::{sum_direct, NeumaierSum, SumSpec, Variant};

/// Direct, resummed and asymptotic values of one kernel quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelReport {
    pub direct: f64,
    pub closed_form: f64,
    pub asymptotic: f64,
    /// `|direct − closed_form|`.
    pub abs_err_dc: f64,
    /// `|closed_form − asymptotic|`.
    pub abs_err_ca: f64,
}

impl KernelReport {
    pub fn new(direct: f64, closed_form: f64, asymptotic: f64) -> Self {
        Self {
            direct,
            closed_form,
            asymptotic,
            abs_err_dc: (direct - closed_form).abs(),
            abs_err_ca: (closed_form - asymptotic).abs(),
        }
    }
}

/// An in-plane vector `(r cos α, r sin α, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    pub norm: f64,
    pub angle: f64,
}

impl Polar {
    pub fn new(norm: f64, angle: f64) -> Self {
        Self { norm, angle }
    }

    pub fn to_point(self) -> Point3 {
        Point3::polar(self.norm, self.angle)
    }

    /// Polar form of the planar part of `p`.
    pub fn from_point(p: Point3) -> Self {
        Self { norm: p.planar_radius(), angle: p.angle() }
    }
}

/// Which diagonal kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Gamma,
    H0e,
}

/// Which argument a directional derivative acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Z,
    P,
}

// ---------------------------------------------------------------------------
// Direct sums
// ---------------------------------------------------------------------------

/// `γ(z,p) = 1/|z̄e^{2iθ₀}−p| − Σ_{j=1}^{K/2−1} [1/|ze^{4jiθ₀}−p| − 1/|z̄e^{(4j+2)iθ₀}−p|]`.
pub fn gamma_direct(z: Point3, p: Point3, cfg: &SectorConfig) -> Result<f64> {
    let mut acc = NeumaierSum::default();
    for (sign, img) in cfg.images(z).skip(1) {
        let r = img.distance(p);
        if r == 0.0 {
            return Err(Error::Domain("image point coincides with the source"));
        }
        acc.add(-sign / r);
    }
    Ok(acc.value())
}

/// `H₀(z,p) = (1 − 2z·p + |z|²|p|²)^{−1/2}`.
pub fn h0(z: Point3, p: Point3) -> Result<f64> {
    let q = 1.0 - 2.0 * z.dot(p) + z.norm2() * p.norm2();
    if !(q > 0.0) {
        return Err(Error::Domain("regular part evaluated at a nonpositive radicand"));
    }
    Ok(1.0 / math::sqrt(q))
}

/// Odd extension of `H₀(·, p)` over the sector images of `z`.
pub fn h0e(z: Point3, p: Point3, cfg: &SectorConfig) -> Result<f64> {
    crate::geometry::extend_odd(|x| h0(x, p), z, cfg)
}

/// Direct sum of the selected kernel.
pub fn kernel_direct(kind: KernelKind, z: Point3, p: Point3, cfg: &SectorConfig) -> Result<f64> {
    match kind {
        KernelKind::Gamma => gamma_direct(z, p, cfg),
        KernelKind::H0e => h0e(z, p, cfg),
    }
}

// ---------------------------------------------------------------------------
// Exact resummations on the diagonal z = p = b
// ---------------------------------------------------------------------------

/// `d = (1 − |b|²)/(2|b|)`.
pub fn offset_d(b_norm: f64) -> f64 {
    (1.0 - b_norm * b_norm) / (2.0 * b_norm)
}

fn check_b(b: Polar) -> Result<()> {
    if !(b.norm > 0.0 && b.norm < 1.0) || !b.angle.is_finite() {
        return Err(Error::Domain("|b| must lie in (0, 1)"));
    }
    Ok(())
}

/// Half-angles of the rotation images `2jθ₀` (`j ≥ 1` unless `with_zero`)
/// and of the reflection images `(2j+1)θ₀ − α_b`.
fn half_angles(cfg: &SectorConfig) -> impl Iterator<Item = (f64, f64)> + '_ {
    let t0 = cfg.theta0();
    (0..cfg.k() / 2).map(move |j| (2.0 * j as f64 * t0, (2 * j + 1) as f64 * t0))
}

/// `γ(b,b) = (1/2|b|)[Σ_{j≥0} csc((2j+1)θ₀ − α_b) − Σ_{j≥1} csc(2jθ₀)]`.
pub fn gamma_bb_closed(b: Polar, cfg: &SectorConfig) -> Result<f64> {
    check_b(b)?;
    let mut acc = NeumaierSum::default();
    for (j, (even, odd)) in half_angles(cfg).enumerate() {
        acc.add(1.0 / math::sin(odd - b.angle));
        if j > 0 {
            acc.add(-1.0 / math::sin(even));
        }
    }
    Ok(acc.value() / (2.0 * b.norm))
}

/// `H₀ᵉ(b,b) = (1/2|b|) Σ_j [(d² + sin²2jθ₀)^{−1/2} − (d² + sin²((2j+1)θ₀ − α_b))^{−1/2}]`.
pub fn h0e_bb_closed(b: Polar, cfg: &SectorConfig) -> Result<f64> {
    check_b(b)?;
    let d2 = math::sq(offset_d(b.norm));
    let mut acc = NeumaierSum::default();
    for (even, odd) in half_angles(cfg) {
        acc.add(1.0 / math::sqrt(d2 + math::sq(math::sin(even))));
        acc.add(-1.0 / math::sqrt(d2 + math::sq(math::sin(odd - b.angle))));
    }
    Ok(acc.value() / (2.0 * b.norm))
}

/// Exact `w·∇_z γ(b,b)` or `w·∇_p γ(b,b)`:
/// `(|w|/4|b|²)[Σ_{j≥1} sin(2jθ₀ ± Δ)/sin²2jθ₀ − Σ_{j≥0} sin((2j+1)θ₀ − α_w)/sin²((2j+1)θ₀ − α_b)]`
/// with `Δ = α_w − α_b` and the sign `+` for the `z` slot.
pub fn gamma_grad_closed(slot: Slot, b: Polar, w: Polar, cfg: &SectorConfig) -> Result<f64> {
    check_b(b)?;
    let delta = match slot {
        Slot::Z => w.angle - b.angle,
        Slot::P => b.angle - w.angle,
    };
    let mut acc = NeumaierSum::default();
    for (j, (even, odd)) in half_angles(cfg).enumerate() {
        if j > 0 {
            acc.add(math::sin(even + delta) / math::sq(math::sin(even)));
        }
        acc.add(-math::sin(odd - w.angle) / math::sq(math::sin(odd - b.angle)));
    }
    Ok(w.norm / (4.0 * b.norm * b.norm) * acc.value())
}

/// Exact `w·∇_z H₀ᵉ(b,b)` or `w·∇_p H₀ᵉ(b,b)`:
/// `(|w|/8|b|²) Σ_j [(cos(4jθ₀ ± Δ) − |b|²cos Δ)/D_j^{3/2} − (cos((4j+2)θ₀ − α_w − α_b) − |b|²cos Δ)/E_j^{3/2}]`
/// with `D_j = d² + sin²2jθ₀`, `E_j = d² + sin²((2j+1)θ₀ − α_b)`.
pub fn h0e_grad_closed(slot: Slot, b: Polar, w: Polar, cfg: &SectorConfig) -> Result<f64> {
    check_b(b)?;
    let d2 = math::sq(offset_d(b.norm));
    let b2 = b.norm * b.norm;
    let delta = w.angle - b.angle;
    let shift = match slot {
        Slot::Z => delta,
        Slot::P => -delta,
    };
    let base = b2 * math::cos(delta);
    let mut acc = NeumaierSum::default();
    for (even, odd) in half_angles(cfg) {
        let dj = d2 + math::sq(math::sin(even));
        let ej = d2 + math::sq(math::sin(odd - b.angle));
        acc.add((math::cos(2.0 * even + shift) - base) / (dj * math::sqrt(dj)));
        acc.add(-(math::cos(2.0 * odd - w.angle - b.angle) - base) / (ej * math::sqrt(ej)));
    }
    Ok(w.norm / (8.0 * b2) * acc.value())
}

/// Exact `wᵀ∇²_{z,p} γ(b,b) w`:
/// `(|w|²/8|b|³)[Σ_{j≥0} (3 − cos((4j+2)θ₀ − 2α_w))/(2σ_j³) − Σ_{j≥1} (3cos 2Δ − cos 4jθ₀)/(2 sin³2jθ₀)]`
/// with `σ_j = sin((2j+1)θ₀ − α_b)`.
pub fn gamma_hess_closed(b: Polar, w: Polar, cfg: &SectorConfig) -> Result<f64> {
    check_b(b)?;
    let c2d = 3.0 * math::cos(2.0 * (w.angle - b.angle));
    let mut acc = NeumaierSum::default();
    for (j, (even, odd)) in half_angles(cfg).enumerate() {
        let s = math::sin(odd - b.angle);
        acc.add((3.0 - math::cos(2.0 * odd - 2.0 * w.angle)) / (2.0 * s * s * s));
        if j > 0 {
            let se = math::sin(even);
            acc.add(-(c2d - math::cos(2.0 * even)) / (2.0 * se * se * se));
        }
    }
    Ok(math::sq(w.norm) / (8.0 * b.norm * b.norm * b.norm) * acc.value())
}

/// Exact `wᵀ∇²_{z,p} H₀ᵉ(b,b) w` as `(|w|²/8|b|³) Σ_j (M_j − N_j)` with, for
/// the rotation by `θ = 4jθ₀`,
/// `M_j = (cos θ − 2|b|²cos²Δ)/D_j^{3/2} + ¾(cos(θ−Δ) − |b|²cos Δ)(cos(θ+Δ) − |b|²cos Δ)/D_j^{5/2}`
/// and, for the reflection by `θ = (4j+2)θ₀`,
/// `N_j = (cos(θ − 2α_w) − 2|b|²cos²Δ)/E_j^{3/2} + ¾(cos(θ − α_w − α_b) − |b|²cos Δ)²/E_j^{5/2}`.
pub fn h0e_hess_closed(b: Polar, w: Polar, cfg: &SectorConfig) -> Result<f64> {
    check_b(b)?;
    let d2 = math::sq(offset_d(b.norm));
    let b2 = b.norm * b.norm;
    let delta = w.angle - b.angle;
    let cd = math::cos(delta);
    let base = b2 * cd;
    let diag = 2.0 * b2 * cd * cd;
    let mut acc = NeumaierSum::default();
    for (even, odd) in half_angles(cfg) {
        let (th_r, th_s) = (2.0 * even, 2.0 * odd);
        let dj = d2 + math::sq(math::sin(even));
        let ej = d2 + math::sq(math::sin(odd - b.angle));
        let dj32 = dj * math::sqrt(dj);
        let ej32 = ej * math::sqrt(ej);
        let m = (math::cos(th_r) - diag) / dj32
            + 0.75 * (math::cos(th_r - delta) - base) * (math::cos(th_r + delta) - base) / (dj32 * dj);
        let n = (math::cos(th_s - 2.0 * w.angle) - diag) / ej32
            + 0.75 * math::sq(math::cos(th_s - w.angle - b.angle) - base) / (ej32 * ej);
        acc.add(m);
        acc.add(-n);
    }
    Ok(math::sq(w.norm) / (8.0 * b2 * b.norm) * acc.value())
}

/// Diagonal value of the selected kernel by resummation.
pub fn closed_value(kind: KernelKind, b: Polar, cfg: &SectorConfig) -> Result<f64> {
    match kind {
        KernelKind::Gamma => gamma_bb_closed(b, cfg),
        KernelKind::H0e => h0e_bb_closed(b, cfg),
    }
}

/// Directional derivative of the selected kernel by resummation.
pub fn closed_grad(kind: KernelKind, slot: Slot, b: Polar, w: Polar, cfg: &SectorConfig) -> Result<f64> {
    match kind {
        KernelKind::Gamma => gamma_grad_closed(slot, b, w, cfg),
        KernelKind::H0e => h0e_grad_closed(slot, b, w, cfg),
    }
}

/// Mixed second derivative of the selected kernel by resummation.
pub fn closed_hess(kind: KernelKind, b: Polar, w: Polar, cfg: &SectorConfig) -> Result<f64> {
    match kind {
        KernelKind::Gamma => gamma_hess_closed(b, w, cfg),
        KernelKind::H0e => h0e_hess_closed(b, w, cfg),
    }
}

// ---------------------------------------------------------------------------
// Asymptotic forms
// ---------------------------------------------------------------------------

fn csum(variant: Variant, k: u32, n: usize, x: f64) -> Result<f64> {
    sum_direct(&SumSpec::new(variant, k, n, x)?)
}

/// `Ŝ_k(K)`.
pub fn s_hat(k: u32, n: usize) -> Result<f64> {
    csum(Variant::AltHat, k, n, 0.0)
}

/// `S_k(K, d)`.
pub fn s_alt(k: u32, n: usize, d: f64) -> Result<f64> {
    csum(Variant::Alt, k, n, d)
}

/// The leading quadratic form of the angular dependence of `wᵀ∇²γ(b,b)w`,
/// in the variables `(α_w, α_b)`:
/// `[[S₃ᵒ − 2S₁ᵒ + 3Ŝ₃ᵉ, 3S₁ᵒ − 3S₃ᵒ − 3Ŝ₃ᵉ], [·, (3/2)(4S₅ᵒ + S₃ᵒ − 3S₁ᵒ) + 3Ŝ₃ᵉ]]`.
pub fn a_gamma(k: usize) -> Result<[[f64; 2]; 2]> {
    let s1o = csum(Variant::Odd, 1, k, 0.0)?;
    let s3o = csum(Variant::Odd, 3, k, 0.0)?;
    let s5o = csum(Variant::Odd, 5, k, 0.0)?;
    let s3e = csum(Variant::EvenHat, 3, k, 0.0)?;
    let a11 = s3o - 2.0 * s1o + 3.0 * s3e;
    let a12 = 3.0 * s1o - 3.0 * s3o - 3.0 * s3e;
    let a22 = 1.5 * (4.0 * s5o + s3o - 3.0 * s1o) + 3.0 * s3e;
    Ok([[a11, a12], [a12, a22]])
}

fn quad_form(m: &[[f64; 2]; 2], x: f64, y: f64) -> f64 {
    m[0][0] * x * x + 2.0 * m[0][1] * x * y + m[1][1] * y * y
}

/// `(α_w, α_b) 𝒜^γ (α_w, α_b)ᵀ`.
pub fn a_gamma_form(m: &[[f64; 2]; 2], alpha_w: f64, alpha_b: f64) -> f64 {
    quad_form(m, alpha_w, alpha_b)
}

/// Asymptotic diagonal value: `Ŝ₁(K)/(2|b|)` or `S₁(K,d)/(2|b|)`.
pub fn asymptotic_value(kind: KernelKind, b: Polar, cfg: &SectorConfig) -> Result<f64> {
    check_b(b)?;
    let k = cfg.k();
    Ok(match kind {
        KernelKind::Gamma => s_hat(1, k)? / (2.0 * b.norm),
        KernelKind::H0e => s_alt(1, k, offset_d(b.norm))? / (2.0 * b.norm),
    })
}

/// Asymptotic directional derivative (identical for both slots):
/// `−Ŝ₁|w|/(4|b|²)` or `(|w|/4|b|²)(−S₁ + d√(1+d²) S₃)`.
pub fn asymptotic_grad(kind: KernelKind, b: Polar, w: Polar, cfg: &SectorConfig) -> Result<f64> {
    check_b(b)?;
    let k = cfg.k();
    let pre = w.norm / (4.0 * b.norm * b.norm);
    Ok(match kind {
        KernelKind::Gamma => -pre * s_hat(1, k)?,
        KernelKind::H0e => {
            let d = offset_d(b.norm);
            pre * (-s_alt(1, k, d)? + d * math::sqrt(1.0 + d * d) * s_alt(3, k, d)?)
        }
    })
}

/// `𝒞₂`-type bracket of the `H₀ᵉ` Hessian: `S₁ − (d + √(1+d²))² S₃ + 3(d² + d⁴) S₅`.
pub fn h0e_hess_bracket(k: usize, d: f64) -> Result<f64> {
    let r = d + math::sqrt(1.0 + d * d);
    let d2 = d * d;
    Ok(s_alt(1, k, d)? - r * r * s_alt(3, k, d)? + 3.0 * (d2 + d2 * d2) * s_alt(5, k, d)?)
}

/// Asymptotic mixed derivative:
/// `(|w|²/8|b|³)[Ŝ₁ + Ŝ₃ + (α_w,α_b)𝒜^γ(α_w,α_b)ᵀ]` for `γ` and
/// `(|w|²/8|b|³)[S₁ − (d+√(1+d²))²S₃ + 3(d²+d⁴)S₅]` for `H₀ᵉ`.
pub fn asymptotic_hess(kind: KernelKind, b: Polar, w: Polar, cfg: &SectorConfig) -> Result<f64> {
    check_b(b)?;
    let k = cfg.k();
    let pre = math::sq(w.norm) / (8.0 * b.norm * b.norm * b.norm);
    Ok(match kind {
        KernelKind::Gamma => {
            let ag = a_gamma(k)?;
            pre * (s_hat(1, k)? + s_hat(3, k)? + quad_form(&ag, w.angle, b.angle))
        }
        KernelKind::H0e => pre * h0e_hess_bracket(k, offset_d(b.norm))?,
    })
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Central-difference step for directional derivatives of the direct sums.
pub const GRAD_FD_STEP: f64 = 1e-6;
/// Step for the mixed second difference.
pub const HESS_FD_STEP: f64 = 1e-4;
/// Discrepancy above which the gradient report switches to Richardson extrapolation.
pub const GRAD_TOL: f64 = 1e-4;
/// Discrepancy above which the Hessian report switches to Richardson extrapolation.
pub const HESS_TOL: f64 = 1e-3;

fn check_gamma_angle(b: Polar, cfg: &SectorConfig, strict: bool) -> Result<()> {
    let half = 0.5 * cfg.theta0();
    let ok = if strict { b.angle.abs() < half } else { b.angle.abs() <= half };
    if !ok {
        return Err(Error::Domain("|α_b| must not exceed θ₀/2"));
    }
    Ok(())
}

/// `γ(b,b)` three ways; requires `|b| > 1/2` and `|α_b| < θ₀/2`.
pub fn gamma_bb(b: Polar, cfg: &SectorConfig) -> Result<KernelReport> {
    check_b(b)?;
    if b.norm <= 0.5 {
        return Err(Error::Domain("γ(b,b) needs |b| > 1/2"));
    }
    check_gamma_angle(b, cfg, true)?;
    let bp = b.to_point();
    Ok(KernelReport::new(
        gamma_direct(bp, bp, cfg)?,
        gamma_bb_closed(b, cfg)?,
        asymptotic_value(KernelKind::Gamma, b, cfg)?,
    ))
}

/// `H₀ᵉ(b,b)` three ways; requires `|α_b| ≤ θ₀/2`.
pub fn h0e_bb(b: Polar, cfg: &SectorConfig) -> Result<KernelReport> {
    check_b(b)?;
    check_gamma_angle(b, cfg, false)?;
    let bp = b.to_point();
    Ok(KernelReport::new(h0e(bp, bp, cfg)?, h0e_bb_closed(b, cfg)?, asymptotic_value(KernelKind::H0e, b, cfg)?))
}

fn unit_dir(w: Polar) -> Point3 {
    Point3::polar(1.0, w.angle)
}

fn check_step(b: Polar, h: f64) -> Result<()> {
    let moved = b.norm + h;
    if !(h > 0.0) || moved == b.norm || h < 64.0 * f64::EPSILON * b.norm {
        return Err(Error::Accuracy { estimate: f64::NAN, error: h });
    }
    Ok(())
}

/// `w·∇ K(b,b)` by a central difference of step `h` along `w/|w|`.
fn fd_grad(kind: KernelKind, slot: Slot, b: Polar, w: Polar, cfg: &SectorConfig, h: f64) -> Result<f64> {
    let bp = b.to_point();
    let e = unit_dir(w) * h;
    let f = |t: Point3| match slot {
        Slot::Z => kernel_direct(kind, bp + t, bp, cfg),
        Slot::P => kernel_direct(kind, bp, bp + t, cfg),
    };
    Ok(w.norm * (f(e)? - f(-e)?) / (2.0 * h))
}

/// `wᵀ∇²_{z,p}K(b,b)w` by the four-point mixed difference of step `h`.
fn fd_hess(kind: KernelKind, b: Polar, w: Polar, cfg: &SectorConfig, h: f64) -> Result<f64> {
    let bp = b.to_point();
    let e = unit_dir(w) * h;
    let f = |s: f64, t: f64| kernel_direct(kind, bp + e * s, bp + e * t, cfg);
    let v = f(1.0, 1.0)? - f(1.0, -1.0)? - f(-1.0, 1.0)? + f(-1.0, -1.0)?;
    Ok(math::sq(w.norm) * v / (4.0 * h * h))
}

fn check_derivative_angles(b: Polar, w: Polar, cfg: &SectorConfig) -> Result<()> {
    check_b(b)?;
    check_gamma_angle(b, cfg, false)?;
    if !(w.angle.abs() <= 1.0) || !(w.norm >= 0.0) {
        return Err(Error::Domain("|α_w| must not exceed 1"));
    }
    Ok(())
}

/// Directional derivative `w·∇_z` or `w·∇_p` of `γ` or `H₀ᵉ` at `z = p = b`,
/// with `b` and `w` taken from `bubble`.
pub fn kernel_grad(kind: KernelKind, slot: Slot, bubble: &PlacedBubble, cfg: &SectorConfig) -> Result<KernelReport> {
    kernel_grad_at(kind, slot, bubble.b, bubble.w, cfg)
}

/// [`kernel_grad`] for explicit `b` and `w`.
pub fn kernel_grad_at(kind: KernelKind, slot: Slot, b: Polar, w: Polar, cfg: &SectorConfig) -> Result<KernelReport> {
    check_derivative_angles(b, w, cfg)?;
    check_step(b, GRAD_FD_STEP)?;
    let closed = closed_grad(kind, slot, b, w, cfg)?;
    let mut direct = fd_grad(kind, slot, b, w, cfg, GRAD_FD_STEP)?;
    if (direct - closed).abs() > GRAD_TOL {
        let half = fd_grad(kind, slot, b, w, cfg, 0.5 * GRAD_FD_STEP)?;
        direct = (4.0 * half - direct) / 3.0;
    }
    Ok(KernelReport::new(direct, closed, asymptotic_grad(kind, b, w, cfg)?))
}

/// Mixed second derivative `wᵀ∇²_{z,p}` of `γ` or `H₀ᵉ` at `z = p = b`.
pub fn kernel_hess(kind: KernelKind, bubble: &PlacedBubble, cfg: &SectorConfig) -> Result<KernelReport> {
    kernel_hess_at(kind, bubble.b, bubble.w, cfg)
}

/// [`kernel_hess`] for explicit `b` and `w`.
pub fn kernel_hess_at(kind: KernelKind, b: Polar, w: Polar, cfg: &SectorConfig) -> Result<KernelReport> {
    check_derivative_angles(b, w, cfg)?;
    check_step(b, HESS_FD_STEP)?;
    let closed = closed_hess(kind, b, w, cfg)?;
    let mut direct = fd_hess(kind, b, w, cfg, HESS_FD_STEP)?;
    if (direct - closed).abs() > HESS_TOL {
        let half = fd_hess(kind, b, w, cfg, 0.5 * HESS_FD_STEP)?;
        direct = (4.0 * half - direct) / 3.0;
    }
    Ok(KernelReport::new(direct, closed, asymptotic_hess(kind, b, w, cfg)?))
}

// ---------------------------------------------------------------------------
// Placed bubble
// ---------------------------------------------------------------------------

/// Profile data behind a [`PlacedBubble`].
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleSource {
    pub profile: ProfileHandle,
    /// Nodal point `ξ`.
    pub xi: Point3,
    /// `θ_*(ξ)`.
    pub theta_star: f64,
    /// `ξ̂ = ξ + a ν(ξ)`.
    pub xi_hat: Point3,
}

/// A rescaled, rotated copy of a profile centred at `b`:
/// `Q_A(z) = (ε^{1/2}/|z−b|) q(ε R_β (z−b)/|z−b|² + ξ̂)` with `β = θ_* + β̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedBubble {
    pub eps: f64,
    /// Offset of `ξ̂` along the unit normal of the nodal set.
    pub a: f64,
    /// `q(ξ̂)`.
    pub q_hat: f64,
    /// `R_βᵀ ∇q(ξ̂)`.
    pub w: Polar,
    pub b: Polar,
    pub beta_hat: f64,
    /// `R_βᵀ ∇²q(ξ̂) R_β`.
    pub w_hess: Mat3,
    /// Present when the bubble is backed by an evaluable profile.
    pub source: Option<BubbleSource>,
}

impl PlacedBubble {
    /// A bubble described only by its expansion data.
    #[allow(clippy::too_many_arguments)]
    pub fn from_scalars(eps: f64, a: f64, q_hat: f64, w: Polar, b: Polar, beta_hat: f64, w_hess: Mat3) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Domain("ε must be positive"));
        }
        check_b(b)?;
        Ok(Self { eps, a, q_hat, w, b, beta_hat, w_hess, source: None })
    }

    /// Places `profile` with nodal point `xi`, deriving `q̂`, `w` and `W`.
    pub fn from_profile(profile: ProfileHandle, xi: Point3, eps: f64, a: f64, b: Polar, beta_hat: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Domain("ε must be positive"));
        }
        check_b(b)?;
        let ts = theta_star(&profile, xi);
        let nu = rotate(Point3::E1, ts);
        let xi_hat = xi + nu * a;
        let beta = ts + beta_hat;
        let q_hat = profile.value(xi_hat);
        let g = rotate(profile.gradient(xi_hat), -beta);
        let w = Polar::new(math::hypot(g.z1, g.z2), math::atan2(g.z2, g.z1));
        let w_hess = conjugate_by_rotation(&profile.hessian(xi_hat), beta);
        Ok(Self {
            eps,
            a,
            q_hat,
            w,
            b,
            beta_hat,
            w_hess,
            source: Some(BubbleSource { profile, xi, theta_star: ts, xi_hat }),
        })
    }

    /// `β = θ_* + β̂` (`β̂` alone without a profile).
    pub fn beta(&self) -> f64 {
        self.beta_hat + self.source.as_ref().map_or(0.0, |s| s.theta_star)
    }

    pub fn w_vec(&self) -> Point3 {
        self.w.to_point()
    }
}

/// Second-order expansion of `Q_A` in `ε/|z−b|`:
/// `(ε^{1/2}/|z−b|)[q̂ + ε w·u/|u|² + ½ε² uᵀWu/|u|⁴]`, `u = z − b`.
pub fn q_a_expansion(z: Point3, bubble: &PlacedBubble) -> Result<f64> {
    let u = z - bubble.b.to_point();
    let r2 = u.norm2();
    if r2 == 0.0 {
        return Err(Error::Domain("placed bubble evaluated at its centre"));
    }
    let e = bubble.eps;
    let lin = bubble.w_vec().dot(u) / r2;
    let quad = bilinear(&bubble.w_hess, u, u) / (r2 * r2);
    Ok(math::sqrt(e / r2) * (bubble.q_hat + e * lin + 0.5 * e * e * quad))
}

/// `Q_A(z)`, through the profile when available and the expansion otherwise.
pub fn q_a(z: Point3, bubble: &PlacedBubble) -> Result<f64> {
    match &bubble.source {
        Some(src) => crate::crown::transformed_bubble(
            &src.profile,
            z,
            bubble.eps,
            src.xi_hat,
            0.0,
            Point3::ORIGIN,
            bubble.b.to_point(),
            bubble.beta(),
        ),
        None => q_a_expansion(z, bubble),
    }
}

/// Odd extension `Q_Aᵉ`.
pub fn q_a_extended(z: Point3, bubble: &PlacedBubble, cfg: &SectorConfig) -> Result<f64> {
    crate::geometry::extend_odd(|x| q_a(x, bubble), z, cfg)
}

/// `T_A(z) = Q_A(z̄e^{2iθ₀}) − Σ_{j=1}^{K/2−1}[Q_A(ze^{4jiθ₀}) − Q_A(z̄e^{(4j+2)iθ₀})]`.
///
/// `closed_form` is the term-by-term second-order Taylor expansion of the
/// images; `asymptotic` is `ε^{1/2}q̂γ + ε^{3/2}w·∇_pγ + (1/6)ε^{5/2}W_{ij}∂²_{p_ip_j}γ`,
/// which differs from it by `(1/6)ε^{5/2} tr W Σ ±|u|⁻³`. The direct sum needs a
/// profile-backed bubble.
pub fn t_a(z: Point3, bubble: &PlacedBubble, cfg: &SectorConfig) -> Result<KernelReport> {
    if bubble.source.is_none() {
        return Err(Error::Precondition("the direct image sum needs a profile-backed bubble"));
    }
    let b = bubble.b.to_point();
    let e = bubble.eps;
    let se = math::sqrt(e);
    let w = bubble.w_vec();
    let trace = bubble.w_hess[0][0] + bubble.w_hess[1][1] + bubble.w_hess[2][2];
    let mut direct = NeumaierSum::default();
    let mut closed = NeumaierSum::default();
    let mut trace_part = NeumaierSum::default();
    for (sign, img) in cfg.images(z).skip(1) {
        let s = -sign;
        direct.add(s * q_a(img, bubble)?);
        let u = img - b;
        let r2 = u.norm2();
        if r2 == 0.0 {
            return Err(Error::Domain("image point coincides with the bubble centre"));
        }
        let r = math::sqrt(r2);
        let r3 = r2 * r;
        closed.add(s * se * bubble.q_hat / r);
        closed.add(s * se * e * w.dot(u) / r3);
        closed.add(s * 0.5 * se * e * e * bilinear(&bubble.w_hess, u, u) / (r3 * r2));
        trace_part.add(s / r3);
    }
    let closed = closed.value();
    let asym = closed - se * e * e * trace * trace_part.value() / 6.0;
    Ok(KernelReport::new(direct.value(), closed, asym))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h0_at_origin_is_one() {
        assert_eq!(h0(Point3::ORIGIN, Point3::new(0.3, -0.2, 0.5)).unwrap(), 1.0);
    }

    #[test]
    fn gamma_direct_finite_on_diagonal() {
        let cfg = SectorConfig::new(8).unwrap();
        let b = Point3::polar(0.8, 0.01);
        assert!(gamma_direct(b, b, &cfg).unwrap().is_finite());
    }

    #[test]
    fn gamma_bb_rejects_wide_angle() {
        let cfg = SectorConfig::new(16).unwrap();
        assert!(gamma_bb(Polar::new(0.9, cfg.theta0()), &cfg).is_err());
    }

    #[test]
    fn t_a_needs_profile() {
        let cfg = SectorConfig::new(8).unwrap();
        let a =
            PlacedBubble::from_scalars(1e-3, 0.0, 0.0, Polar::new(1.0, 0.0), Polar::new(0.9, 0.0), 0.0, [[0.0; 3]; 3])
                .unwrap();
        assert!(t_a(Point3::new(0.5, 0.0, 0.0), &a, &cfg).is_err());
    }
}
