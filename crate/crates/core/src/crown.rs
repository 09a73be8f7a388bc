// SPDX-License-Identifier: Apache-2.0

//! The crown profile: one positive bubble `U` surrounded by `m` concentrated
//! negative bubbles on a ring of radius `√(1−μ²)`, the explicit correction
//! `ψ_{d,1}`, midpoint estimates, and the linearisation kernels `Z₀…Z₅` of the
//! placed-bubble family.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::geometry::{rotate, Mat3, Point3};
use crate::math;
use crate::sums::{csc_full_sum, NeumaierSum};

/// `3^{1/4}`.
pub const THREE_QUARTER_ROOT: f64 = 1.316_074_012_952_492_4;

/// Parameters of the crown profile.
#[derive(Debug, Clone, PartialEq)]
pub struct CrownParams {
    m: usize,
    mu: f64,
    d: f64,
    xi: Vec<Point3>,
}

impl CrownParams {
    pub fn m(&self) -> usize {
        self.m
    }
    /// Concentration `μ = d²/(m² log² m)`.
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    /// Bubble centres `ξ_j = √(1−μ²)(cos 2(j−1)π/m, sin 2(j−1)π/m, 0)`, stored from `j = 1`.
    pub fn xi(&self) -> &[Point3] {
        &self.xi
    }
    /// Ring radius `√(1−μ²)`.
    pub fn ring_radius(&self) -> f64 {
        math::sqrt(1.0 - self.mu * self.mu)
    }
}

/// Builds the crown parameters with `d = √2 m log m / Σ_{j=1}^{m−1} csc(jπ/m)`.
pub fn build_crown(m: usize) -> Result<CrownParams> {
    if m < 8 || m % 2 != 0 {
        return Err(Error::Domain("crown size m must be even and at least 8"));
    }
    let mf = m as f64;
    let lm = math::ln(mf);
    let d = SQRT_2 * mf * lm / csc_full_sum(m)?;
    let mu = d * d / (mf * mf * lm * lm);
    let rho = math::sqrt(1.0 - mu * mu);
    let xi = (0..m).map(|j| Point3::polar(rho, 2.0 * PI * j as f64 / mf)).collect();
    Ok(CrownParams { m, mu, d, xi })
}

// c / √(s² + |y|²) and its derivatives.
#[inline]
fn kernel_value(c: f64, s2: f64, y: Point3) -> f64 {
    c / math::sqrt(s2 + y.norm2())
}

#[inline]
fn kernel_gradient(c: f64, s2: f64, y: Point3) -> Point3 {
    let q = s2 + y.norm2();
    y * (-c / (q * math::sqrt(q)))
}

#[inline]
fn kernel_hessian_add(h: &mut Mat3, c: f64, s2: f64, y: Point3) {
    let q = s2 + y.norm2();
    let r = math::sqrt(q);
    let a = -c / (q * r);
    let b = 3.0 * c / (q * q * r);
    let v = y.to_array();
    for i in 0..3 {
        for j in 0..3 {
            h[i][j] += b * v[i] * v[j] + if i == j { a } else { 0.0 };
        }
    }
}

/// Talenti bubble `U(z) = 3^{1/4}(1+|z|²)^{−1/2}`.
#[inline]
pub fn u_bubble(z: Point3) -> f64 {
    kernel_value(THREE_QUARTER_ROOT, 1.0, z)
}

pub fn u_bubble_gradient(z: Point3) -> Point3 {
    kernel_gradient(THREE_QUARTER_ROOT, 1.0, z)
}

pub fn u_bubble_hessian(z: Point3) -> Mat3 {
    let mut h = [[0.0; 3]; 3];
    kernel_hessian_add(&mut h, THREE_QUARTER_ROOT, 1.0, z);
    h
}

/// `U_*(z) = U(z) − Σ_j μ^{−1/2} U((z−ξ_j)/μ)`, with each negative bubble
/// evaluated as `3^{1/4} μ^{1/2} / √(μ² + |z−ξ_j|²)`.
pub fn u_star(z: Point3, p: &CrownParams) -> f64 {
    let c = THREE_QUARTER_ROOT * math::sqrt(p.mu);
    let s2 = p.mu * p.mu;
    let mut acc = NeumaierSum::default();
    acc.add(u_bubble(z));
    for &x in &p.xi {
        acc.add(-kernel_value(c, s2, z - x));
    }
    acc.value()
}

pub fn u_star_gradient(z: Point3, p: &CrownParams) -> Point3 {
    let c = THREE_QUARTER_ROOT * math::sqrt(p.mu);
    let s2 = p.mu * p.mu;
    p.xi.iter().fold(u_bubble_gradient(z), |g, &x| g - kernel_gradient(c, s2, z - x))
}

pub fn u_star_hessian(z: Point3, p: &CrownParams) -> Mat3 {
    let c = THREE_QUARTER_ROOT * math::sqrt(p.mu);
    let s2 = p.mu * p.mu;
    let mut h = u_bubble_hessian(z);
    for &x in &p.xi {
        kernel_hessian_add(&mut h, -c, s2, z - x);
    }
    h
}

/// Explicit correction with sources at `±(1,0,0)`:
/// `−√2 (1+|z|²)^{−1/2} (8z₁² − (1+|z|²)²) / ((1+|z|²) √((1+|z|²)² − 4z₁²))`.
pub fn psi_d11(z: Point3) -> Result<f64> {
    let a = 1.0 + z.norm2();
    let disc = a * a - 4.0 * z.z1 * z.z1;
    if !(disc > 0.0) {
        return Err(Error::Domain("psi_d11 evaluated at its pole (±1, 0, 0)"));
    }
    Ok(-SQRT_2 / math::sqrt(a) * (8.0 * z.z1 * z.z1 - a * a) / (a * math::sqrt(disc)))
}

/// Distance below which the analytic pole cancellation in [`psi_d1`] is lost.
pub const PSI_POLE_WARNING_DISTANCE: f64 = 1e-6;

/// Value of `ψ_{d,1}` with a flag raised near one of its removable poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValue {
    pub value: f64,
    pub near_pole: bool,
}

/// Unit-circle source points `ξ_{j,0} = (cos 2(j−1)π/m, sin 2(j−1)π/m, 0)`.
fn unit_ring(m: usize, j: usize) -> Point3 {
    Point3::polar(1.0, 2.0 * PI * j as f64 / m as f64)
}

/// `ψ_{d,1}(z) = 3^{1/4} μ^{1/2} Σ_{j=1}^{m/2} (ψ_{d,1,j}(z) + 1/|z−ξ_{j,0}| + 1/|z−ξ_{j+m/2,0}|)`,
/// where `ψ_{d,1,j}` is `ψ_{d,1,1}` rotated by `2(j−1)π/m`.
pub fn psi_d1(z: Point3, p: &CrownParams) -> Result<PsiValue> {
    let m = p.m;
    let mut acc = NeumaierSum::default();
    let mut near_pole = false;
    for j in 0..m / 2 {
        let ang = 2.0 * PI * j as f64 / m as f64;
        let zr = rotate(z, -ang);
        let d1 = z.distance(unit_ring(m, j));
        let d2 = z.distance(unit_ring(m, j + m / 2));
        if d1.min(d2) < PSI_POLE_WARNING_DISTANCE {
            near_pole = true;
        }
        if d1 == 0.0 || d2 == 0.0 {
            return Err(Error::Domain("psi_d1 evaluated exactly at a source point"));
        }
        acc.add(psi_d11(zr)?);
        acc.add(1.0 / d1);
        acc.add(1.0 / d2);
    }
    Ok(PsiValue { value: THREE_QUARTER_ROOT * math::sqrt(p.mu) * acc.value(), near_pole })
}

/// Midpoint angle `θ_j = 2(j−1)π/m − π/m`.
#[inline]
fn mid_angle(j: usize, m: usize) -> f64 {
    (2.0 * (j as f64 - 1.0) - 1.0) * PI / m as f64
}

/// Closed form of `ψ_{d,1}` at `ξ̂₀ = (cos π/m, sin π/m, 0)`:
/// `3^{1/4}μ^{1/2} Σ_{j=1}^{m/2} [csc((2j−1)π/2m) − 1/|sin θ_j| + 2|sin θ_j|]`, `θ_j = (2j−3)π/m`.
pub fn psi_d1_midpoint(p: &CrownParams) -> f64 {
    let m = p.m;
    let s: NeumaierSum = (1..=m / 2)
        .map(|j| {
            let t = math::sin(mid_angle(j, m)).abs();
            1.0 / math::sin((2 * j - 1) as f64 * PI / (2 * m) as f64) - 1.0 / t + 2.0 * t
        })
        .collect();
    THREE_QUARTER_ROOT * math::sqrt(p.mu) * s.value()
}

/// `Σ_{j=1}^{m/2} 2|sin θ_j|` and its closed form `2 sin(π/m) + (1 − cos((m−2)π/m))/sin(π/m)`.
pub fn midpoint_sine_sum(m: usize) -> (f64, f64) {
    let direct: NeumaierSum = (1..=m / 2).map(|j| 2.0 * math::sin(mid_angle(j, m)).abs()).collect();
    let s1 = math::sin(PI / m as f64);
    let closed = 2.0 * s1 + (1.0 - math::cos((m as f64 - 2.0) * PI / m as f64)) / s1;
    (direct.value(), closed)
}

/// `Σ_{j=1}^{m/2} csc(jπ/m) − Σ_{j=1}^{m/2} 1/|sin θ_j|`, the bracket compared
/// against `−csc(π/m)` in the midpoint positivity argument.
pub fn midpoint_cosecant_difference(m: usize) -> f64 {
    let mf = m as f64;
    (1..=m / 2)
        .map(|j| 1.0 / math::sin(j as f64 * PI / mf) - 1.0 / math::sin(mid_angle(j, m)).abs())
        .collect::<NeumaierSum>()
        .value()
}

/// Midpoint evaluation `U_*(ξ₀) + ψ_{d,1}(ξ̂₀)` and the reference lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointReport {
    pub u_star: f64,
    pub psi: f64,
    pub value: f64,
    /// `3^{1/4} d / (2π log m)`.
    pub bound: f64,
}

/// Evaluates the crown profile plus correction between `ξ₁` and `ξ₂`.
pub fn q_mid_lower(p: &CrownParams) -> MidpointReport {
    let m = p.m as f64;
    let xi0 = Point3::polar(p.ring_radius(), PI / m);
    let us = u_star(xi0, p);
    let psi = psi_d1_midpoint(p);
    MidpointReport { u_star: us, psi, value: us + psi, bound: THREE_QUARTER_ROOT * p.d / (2.0 * PI * math::ln(m)) }
}

/// Ring distance `h` with `h² = ((r−√(1−μ²))² + z₃²)/(4r√(1−μ²))`.
pub fn h_param(z: Point3, p: &CrownParams) -> Result<f64> {
    let r = z.planar_radius();
    if !(r > 0.0) {
        return Err(Error::Domain("ring distance needs a point off the z3 axis"));
    }
    let rho = p.ring_radius();
    Ok(math::sqrt((math::sq(r - rho) + z.z3 * z.z3) / (4.0 * r * rho)))
}

/// Largest relative residual of `|z−ξ_j|² = 4r√(1−μ²)(h² + sin²((j−1)π/m − θ/2))` over all `j`.
pub fn h_identity_residual(z: Point3, p: &CrownParams) -> Result<f64> {
    let h = h_param(z, p)?;
    let r = z.planar_radius();
    let th = z.angle();
    let rho = p.ring_radius();
    let mut worst: f64 = 0.0;
    for (j, &x) in p.xi.iter().enumerate() {
        let lhs = (z - x).norm2();
        let s = math::sin(j as f64 * PI / p.m as f64 - 0.5 * th);
        let rhs = 4.0 * r * rho * (h * h + s * s);
        worst = worst.max((lhs - rhs).abs() / lhs.max(1e-300));
    }
    Ok(worst)
}

/// Central-difference step used by the default [`Profile`] derivatives.
pub const PROFILE_FD_STEP: f64 = 1e-5;

/// A smooth function on ℝ³ standing in for the crown solution.
pub trait Profile {
    fn value(&self, z: Point3) -> f64;

    /// Identifier written to reports.
    fn tag(&self) -> &'static str;

    fn gradient(&self, z: Point3) -> Point3 {
        fd_gradient(|x| self.value(x), z)
    }

    fn hessian(&self, z: Point3) -> Mat3 {
        fd_hessian(|x| self.value(x), z)
    }
}

/// Central-difference gradient with step `PROFILE_FD_STEP · max(1, |z|)`.
pub fn fd_gradient<F: Fn(Point3) -> f64>(f: F, z: Point3) -> Point3 {
    let h = PROFILE_FD_STEP * z.norm().max(1.0);
    let d = |e: Point3| (f(z + e * h) - f(z - e * h)) / (2.0 * h);
    Point3::new(d(Point3::E1), d(Point3::E2), d(Point3::E3))
}

/// Four-point mixed differences with step `1e-4 · max(1, |z|)`.
pub fn fd_hessian<F: Fn(Point3) -> f64>(f: F, z: Point3) -> Mat3 {
    let h = 1e-4 * z.norm().max(1.0);
    let basis = [Point3::E1, Point3::E2, Point3::E3];
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (ei, ej) = (basis[i] * h, basis[j] * h);
            out[i][j] = (f(z + ei + ej) - f(z + ei - ej) - f(z - ei + ej) + f(z - ei - ej)) / (4.0 * h * h);
        }
    }
    out
}

/// The built-in profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileHandle {
    /// The single positive bubble `U`.
    Talenti,
    /// `U_*`.
    UStar(CrownParams),
    /// `U_* + ψ_{d,1}`.
    UStarCorrected(CrownParams),
}

impl ProfileHandle {
    pub fn crown(&self) -> Option<&CrownParams> {
        match self {
            ProfileHandle::Talenti => None,
            ProfileHandle::UStar(p) | ProfileHandle::UStarCorrected(p) => Some(p),
        }
    }
}

impl Profile for ProfileHandle {
    fn value(&self, z: Point3) -> f64 {
        match self {
            ProfileHandle::Talenti => u_bubble(z),
            ProfileHandle::UStar(p) => u_star(z, p),
            ProfileHandle::UStarCorrected(p) => match psi_d1(z, p) {
                Ok(psi) => u_star(z, p) + psi.value,
                Err(_) => f64::NAN,
            },
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            ProfileHandle::Talenti => "talenti",
            ProfileHandle::UStar(_) => "u_star",
            ProfileHandle::UStarCorrected(_) => "u_star_corrected",
        }
    }

    fn gradient(&self, z: Point3) -> Point3 {
        match self {
            ProfileHandle::Talenti => u_bubble_gradient(z),
            ProfileHandle::UStar(p) => u_star_gradient(z, p),
            ProfileHandle::UStarCorrected(_) => fd_gradient(|x| self.value(x), z),
        }
    }

    fn hessian(&self, z: Point3) -> Mat3 {
        match self {
            ProfileHandle::Talenti => u_bubble_hessian(z),
            ProfileHandle::UStar(p) => u_star_hessian(z, p),
            ProfileHandle::UStarCorrected(_) => fd_hessian(|x| self.value(x), z),
        }
    }
}

/// Angle `θ_*` with `R_{θ_*}ᵀ ∇q(ξ) = |∇q(ξ)| e₁`; requires `∂_{z₃}q(ξ) = 0`.
pub fn theta_star<P: Profile + ?Sized>(profile: &P, xi: Point3) -> f64 {
    let g = profile.gradient(xi);
    math::atan2(g.z2, g.z1)
}

/// The placed bubble `(ε^{1/2}/|z−b|) q(ε R_β (z−b)/|z−b|² + ξ + a ν)` for a
/// general profile, with `ν` supplied by the caller.
#[allow(clippy::too_many_arguments)]
pub fn transformed_bubble<P: Profile + ?Sized>(
    profile: &P,
    z: Point3,
    eps: f64,
    xi: Point3,
    a: f64,
    nu: Point3,
    b: Point3,
    beta: f64,
) -> Result<f64> {
    let y = z - b;
    let r2 = y.norm2();
    if r2 == 0.0 {
        return Err(Error::Domain("placed bubble evaluated at its centre"));
    }
    let x = rotate(y * (eps / r2), beta) + xi + nu * a;
    Ok(math::sqrt(eps) / math::sqrt(r2) * profile.value(x))
}

/// Linearisation kernels `Z_j(y)`, `j = 0..5`, of the placed-bubble family at
/// `ε = 1, a = 0, b = 0, β = θ_*`. With `X = R_{θ_*} y/|y|² + ξ`, `ν = R e₁`, `τ = R e₂`:
///
/// * `Z₀ = q(X)/(2|y|) + ∇q(X)·R y/|y|³` (dilation),
/// * `Z₁ = ∇q(X)·ν/|y|`, `Z₂ = ∇q(X)·τ/|y|` (normal and tangential shifts of ξ),
/// * `Z₃ = (2y₁/|y|²)Z₀ − Z₁/|y|²`, `Z₄ = (2y₂/|y|²)Z₀ − Z₂/|y|²` (translations of b),
/// * `Z₅ = (y₁Z₂ − y₂Z₁)/|y|²` (rotation).
pub fn kernel_z<P: Profile + ?Sized>(j: usize, y: Point3, profile: &P, xi: Point3, theta_star: f64) -> Result<f64> {
    if j > 5 {
        return Err(Error::Domain("kernel index must be in 0..=5"));
    }
    let r2 = y.norm2();
    if r2 == 0.0 {
        return Err(Error::Domain("kernel evaluated at y = 0"));
    }
    let r = math::sqrt(r2);
    let ry = rotate(y, theta_star);
    let x = ry * (1.0 / r2) + xi;
    let g = profile.gradient(x);
    let z1 = g.dot(rotate(Point3::E1, theta_star)) / r;
    let z2 = g.dot(rotate(Point3::E2, theta_star)) / r;
    let z0 = || profile.value(x) / (2.0 * r) + g.dot(ry) / (r2 * r);
    Ok(match j {
        0 => z0(),
        1 => z1,
        2 => z2,
        3 => 2.0 * y.z1 / r2 * z0() - z1 / r2,
        4 => 2.0 * y.z2 / r2 * z0() - z2 / r2,
        _ => (y.z1 * z2 - y.z2 * z1) / r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_quarter_root_constant() {
        assert!((THREE_QUARTER_ROOT - math::powf(3.0, 0.25)).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_or_odd_m() {
        assert!(build_crown(6).is_err());
        assert!(build_crown(9).is_err());
    }

    #[test]
    fn psi_at_origin() {
        assert!((psi_d11(Point3::ORIGIN).unwrap() - SQRT_2).abs() < 1e-15);
        assert!(psi_d11(Point3::E1).is_err());
    }

    #[test]
    fn analytic_gradient_matches_difference() {
        let p = build_crown(16).unwrap();
        let z = Point3::new(0.7, 0.3, 0.2);
        let g = u_star_gradient(z, &p);
        let h = 1e-6;
        let fd = (u_star(z + Point3::E1 * h, &p) - u_star(z - Point3::E1 * h, &p)) / (2.0 * h);
        assert!((g.z1 - fd).abs() < 1e-6 * (1.0 + fd.abs()));
    }
}
