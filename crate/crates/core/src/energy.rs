// SPDX-License-Identifier: Apache-2.0

//! The reduced energy `Ψ(A)` of one placed bubble in the sector, its leading
//! closed form, the constant `C_*(ξ)`, and a deterministic box-constrained
//! minimiser.
//!
//! The nodal point `ξ` is frozen: `Ψ` only sees it through `|∇q(ξ)|` and
//! `C_*(ξ)`, collected in [`ReducedConfig`]. The remaining coordinates are
//! `(ε, a, d, α_b, α_w)` with `|b| = √(1+d²) − d`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::crown::{build_crown, Profile, ProfileHandle};
use crate::error::{Error, Result};
use crate::geometry::{Point3, SectorConfig};
use crate::kernels::{self, a_gamma_form, s_alt, s_hat, KernelKind, Polar, Slot};
use crate::math;
use crate::nodal::radial_nodal_root_in;
use crate::special::{integrate, integrate_breaks, QuadratureConfig};

pub use crate::kernels::a_gamma;

/// Model constants of the reduced energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedConfig {
    pub k: usize,
    pub lambda: f64,
    /// `|∇q(ξ)|`.
    pub gnorm: f64,
    /// `C_*(ξ)`.
    pub cstar: f64,
    /// Box parameter `δ ∈ (0, 1)`.
    pub delta: f64,
}

impl ReducedConfig {
    pub fn new(k: usize, lambda: f64, gnorm: f64, cstar: f64, delta: f64) -> Result<Self> {
        let cfg = Self { k, lambda, gnorm, cstar, delta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        SectorConfig::new(self.k)?;
        if self.k < 16 {
            return Err(Error::Domain("the reduced box needs K ≥ 16"));
        }
        if !(self.lambda > 0.0) || !(self.gnorm > 0.0) || !(self.cstar > 0.0) {
            return Err(Error::Domain("λ, |∇q| and C_* must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain("δ must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn sector(&self) -> SectorConfig {
        SectorConfig::new(self.k).expect("validated")
    }

    pub fn bounds(&self) -> BoxBounds {
        let k = self.k as f64;
        let lk = math::ln(k);
        let llk = math::ln(lk);
        let k3 = k * k * k;
        let isd = 1.0 / math::sqrt(self.delta);
        BoxBounds {
            eps: (self.delta / k3, 1.0 / (self.delta * k3)),
            a_scale: lk / self.delta,
            d: ((lk - llk) / k, lk / k),
            alpha_b: isd * lk / (k * k),
            alpha_w: isd * lk / k,
        }
    }
}

/// A point of the reduced parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPoint {
    pub eps: f64,
    pub a: f64,
    pub d: f64,
    pub alpha_b: f64,
    pub alpha_w: f64,
}

impl ReducedPoint {
    /// `|b| = √(1+d²) − d`, evaluated without cancellation.
    pub fn b_norm(&self) -> f64 {
        b_from_d(self.d)
    }

    pub fn b(&self) -> Polar {
        Polar::new(self.b_norm(), self.alpha_b)
    }
}

/// `√(1+d²) − d`.
pub fn b_from_d(d: f64) -> f64 {
    1.0 / (math::sqrt(1.0 + d * d) + d)
}

/// The admissible box: `εK³ ∈ [δ, δ⁻¹]`, `|a| ≤ δ⁻¹ ε log K`,
/// `d ∈ [(log K − log log K)/K, log K/K]`, `|α_b| ≤ δ^{−1/2}K⁻² log K`,
/// `|α_w| ≤ δ^{−1/2}K⁻¹ log K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxBounds {
    pub eps: (f64, f64),
    /// `|a| ≤ a_scale · ε`.
    pub a_scale: f64,
    pub d: (f64, f64),
    pub alpha_b: f64,
    pub alpha_w: f64,
}

impl BoxBounds {
    /// Membership with a relative slack of `1e-12` on every face.
    pub fn contains(&self, p: &ReducedPoint) -> bool {
        let tol = 1e-12;
        let within = |x: f64, lo: f64, hi: f64| x >= lo - tol * hi.abs() && x <= hi + tol * hi.abs();
        within(p.eps, self.eps.0, self.eps.1)
            && p.a.abs() <= self.a_scale * p.eps * (1.0 + tol)
            && within(p.d, self.d.0, self.d.1)
            && p.alpha_b.abs() <= self.alpha_b * (1.0 + tol)
            && p.alpha_w.abs() <= self.alpha_w * (1.0 + tol)
    }

    /// `(lo, hi)` of each search coordinate `(ε, a/ε, d, α_b, α_w)`.
    pub fn axes(&self) -> [(f64, f64); 5] {
        [self.eps, (-self.a_scale, self.a_scale), self.d, (-self.alpha_b, self.alpha_b), (-self.alpha_w, self.alpha_w)]
    }
}

/// Names of the search coordinates, in the order of [`BoxBounds::axes`].
pub const AXIS_NAMES: [&str; 5] = ["eps", "a", "d", "alpha_b", "alpha_w"];

fn to_point(x: &[f64; 5]) -> ReducedPoint {
    ReducedPoint { eps: x[0], a: x[1] * x[0], d: x[2], alpha_b: x[3], alpha_w: x[4] }
}

// ---------------------------------------------------------------------------
// Leading constants
// ---------------------------------------------------------------------------

/// `𝒞₀(K,d) = Ŝ₁(K) + S₁(K,d)`.
pub fn c0(k: usize, d: f64) -> Result<f64> {
    Ok(s_hat(1, k)? + s_alt(1, k, d)?)
}

/// `𝒞₂(K,d) = Ŝ₁ + Ŝ₃ + S₁ − (d+√(1+d²))² S₃ + 3(d²+d⁴) S₅`.
pub fn c2(k: usize, d: f64) -> Result<f64> {
    Ok(s_hat(1, k)? + s_hat(3, k)? + kernels::h0e_hess_bracket(k, d)?)
}

/// `𝒜^γ` with `α_b` rescaled by `K`: `[[A₁₁, A₁₂/K], [A₁₂/K, A₂₂/K²]]`.
pub fn a_gamma_hat(k: usize) -> Result<[[f64; 2]; 2]> {
    let a = a_gamma(k)?;
    let kf = k as f64;
    Ok([[a[0][0], a[0][1] / kf], [a[1][0] / kf, a[1][1] / (kf * kf)]])
}

/// Smallest eigenvalue of a symmetric 2×2 matrix.
pub fn min_eigenvalue(m: &[[f64; 2]; 2]) -> f64 {
    let tr = 0.5 * (m[0][0] + m[1][1]);
    let diff = 0.5 * (m[0][0] - m[1][1]);
    tr - math::hypot(diff, m[0][1])
}

// ---------------------------------------------------------------------------
// Reduced energy
// ---------------------------------------------------------------------------

/// `Ψ(A) = ε q̂² ℋ(b,b) + ε² q̂ w·[∇_zℋ + ∇_pℋ](b,b) + ε³ wᵀ∇²_{z,p}ℋ(b,b) w − λε²C_*`
/// with `ℋ = H₀ᵉ + γ`, `q̂ = a|∇q|`, `|w| = |∇q|`, from the exact resummed
/// kernel sums.
pub fn psi_full(p: &ReducedPoint, cfg: &ReducedConfig) -> Result<f64> {
    let sector = cfg.sector();
    let b = p.b();
    let w = Polar::new(cfg.gnorm, p.alpha_w);
    let q = p.a * cfg.gnorm;
    let mut value = 0.0;
    let mut grad = 0.0;
    let mut hess = 0.0;
    for kind in [KernelKind::Gamma, KernelKind::H0e] {
        value += kernels::closed_value(kind, b, &sector)?;
        grad += kernels::closed_grad(kind, Slot::Z, b, w, &sector)?;
        grad += kernels::closed_grad(kind, Slot::P, b, w, &sector)?;
        hess += kernels::closed_hess(kind, b, w, &sector)?;
    }
    let e = p.eps;
    Ok(e * q * q * value + e * e * q * grad + e * e * e * hess - cfg.lambda * e * e * cfg.cstar)
}

/// The sums of the leading model that depend only on `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadingModel {
    cfg: ReducedConfig,
    a_gamma: [[f64; 2]; 2],
    s_hat1: f64,
    s_hat3: f64,
    by_d: BTreeMap<u64, (f64, f64)>,
}

impl LeadingModel {
    pub fn new(cfg: &ReducedConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg: *cfg,
            a_gamma: a_gamma(cfg.k)?,
            s_hat1: s_hat(1, cfg.k)?,
            s_hat3: s_hat(3, cfg.k)?,
            by_d: BTreeMap::new(),
        })
    }

    pub fn config(&self) -> &ReducedConfig {
        &self.cfg
    }

    /// `(𝒞₀, 𝒞₂)` at `d`, memoised.
    pub fn constants(&mut self, d: f64) -> Result<(f64, f64)> {
        if let Some(v) = self.by_d.get(&d.to_bits()) {
            return Ok(*v);
        }
        let k = self.cfg.k;
        let v = (self.s_hat1 + s_alt(1, k, d)?, self.s_hat1 + self.s_hat3 + kernels::h0e_hess_bracket(k, d)?);
        self.by_d.insert(d.to_bits(), v);
        Ok(v)
    }

    /// [`psi_leading`] with cached sums.
    pub fn psi(&mut self, p: &ReducedPoint) -> Result<f64> {
        let (c0v, c2v) = self.constants(p.d)?;
        Ok(self.psi_with(p, c0v, c2v))
    }

    fn psi_with(&self, p: &ReducedPoint, c0v: f64, c2v: f64) -> f64 {
        let cfg = &self.cfg;
        let b = p.b_norm();
        let g2 = cfg.gnorm * cfg.gnorm;
        let e = p.eps;
        let pre = g2 / (8.0 * b * b * b);
        e * math::sq(p.a * cfg.gnorm) * c0v / (2.0 * b) + e * e * e * pre * c2v - cfg.lambda * e * e * cfg.cstar
            + e * e * e * pre * a_gamma_form(&self.a_gamma, p.alpha_w, p.alpha_b)
    }

    /// `ε* = 16|b|³λC_*/(3|∇q|²𝒞₂)`, the critical point in `ε` at `a = α = 0`.
    pub fn eps_critical(&mut self, d: f64) -> Result<f64> {
        let (_, c2v) = self.constants(d)?;
        let b = b_from_d(d);
        let cfg = &self.cfg;
        Ok(16.0 * b * b * b * cfg.lambda * cfg.cstar / (3.0 * cfg.gnorm * cfg.gnorm * c2v))
    }
}

/// `ε(a|∇q|)²𝒞₀/(2|b|) + ε³|∇q|²𝒞₂/(8|b|³) − λε²C_* + ε³(|∇q|²/8|b|³)(α_w,α_b)𝒜^γ(α_w,α_b)ᵀ`.
pub fn psi_leading(p: &ReducedPoint, cfg: &ReducedConfig) -> Result<f64> {
    LeadingModel::new(cfg)?.psi(p)
}

/// `q6/3 + 2π Ψ(A)`.
pub fn j_reduced(psi: f64, q6_const: f64) -> f64 {
    q6_const / 3.0 + 2.0 * PI * psi
}

/// `4π ∫₀^∞ f(r)⁶ r² dr` for a radial profile.
pub fn sixth_power_integral_radial<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    let cfg = QuadratureConfig::new(1e-300, 1e-12, 4000)?;
    let inner = integrate(|r| math::powi(f(r), 6) * r * r, 0.0, 1.0, &cfg)?;
    let outer = integrate(|r| math::powi(f(r), 6) * r * r, 1.0, f64::INFINITY, &cfg)?;
    Ok(4.0 * PI * (inner + outer))
}

// ---------------------------------------------------------------------------
// Minimisation
// ---------------------------------------------------------------------------

/// Which energy is minimised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Leading,
    Full,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Leading => "leading",
            Mode::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "leading" => Some(Mode::Leading),
            "full" => Some(Mode::Full),
            _ => None,
        }
    }
}

/// Evaluates `f(0), …, f(n−1)` in index order; implementations may run in
/// parallel but must return results in order.
pub trait BatchMap {
    fn map(&self, n: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64>;
}

/// Sequential [`BatchMap`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl BatchMap for Serial {
    fn map(&self, n: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
        (0..n).map(f).collect()
    }
}

/// Minimiser settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeConfig {
    /// Grid points per axis (at least 9).
    pub grid: usize,
    /// Golden-section tolerance as a fraction of the axis width.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self { grid: 9, tol: 1e-4, max_sweeps: 40 }
    }
}

/// Fractional distance below which a coordinate counts as on the boundary.
pub const BOUNDARY_FRACTION: f64 = 1e-3;

/// Position of one coordinate of the minimiser relative to its interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisReport {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
    /// `(value − lo)/(hi − lo)`.
    pub from_lo: f64,
    /// `(hi − value)/(hi − lo)`.
    pub from_hi: f64,
    pub interior: bool,
}

/// Scaling diagnostics of a minimiser.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// `ε* K³`.
    pub eps_k3: f64,
    /// `ε*·3|∇q|²𝒞₂(d*)/(16|b*|³λC_*)`.
    pub eps_ratio: f64,
    /// `K d* − log K + ½ log log K`.
    pub kd_offset: f64,
    /// `|a*|/(δ⁻¹ε* log K)`.
    pub a_fraction: f64,
    /// `|α_b*|` over its box half-width.
    pub alpha_b_fraction: f64,
    /// `|α_w*|` over its box half-width.
    pub alpha_w_fraction: f64,
    pub axes: [AxisReport; 5],
    pub interior: bool,
    pub evaluations: usize,
}

/// Result of [`minimize_psi`].
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub argmin: ReducedPoint,
    pub value: f64,
    pub mode: Mode,
    pub diagnostics: Diagnostics,
}

enum Objective {
    Leading(LeadingModel),
    Full(ReducedConfig),
}

impl Objective {
    fn new(cfg: &ReducedConfig, mode: Mode) -> Result<Self> {
        Ok(match mode {
            Mode::Leading => Objective::Leading(LeadingModel::new(cfg)?),
            Mode::Full => Objective::Full(*cfg),
        })
    }

    fn eval(&mut self, x: &[f64; 5]) -> Result<f64> {
        let p = to_point(x);
        match self {
            Objective::Leading(m) => m.psi(&p),
            Objective::Full(c) => psi_full(&p, c),
        }
    }
}

fn grid_coord(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

/// Golden-section search on `[lo, hi]`; returns `(x, f(x))` of the best point seen.
fn golden<F: FnMut(f64) -> Result<f64>>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64, usize)> {
    let r = 0.5 * (math::sqrt(5.0) - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evals = 2;
    let (fa, fb) = (f(a)?, f(b)?);
    evals += 2;
    let mut best = if fa <= fb { (a, fa) } else { (b, fb) };
    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
        evals += 1;
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok((best.0, best.1, evals))
}

/// [`minimize_psi_with`] with the default settings and a sequential grid.
pub fn minimize_psi(cfg: &ReducedConfig, mode: Mode) -> Result<Minimum> {
    minimize_psi_with(cfg, mode, &MinimizeConfig::default(), &Serial)
}

/// Grid seeding over the box followed by coordinate-wise golden-section
/// sweeps until a full sweep no longer improves the value.
pub fn minimize_psi_with<M: BatchMap + ?Sized>(
    cfg: &ReducedConfig,
    mode: Mode,
    opts: &MinimizeConfig,
    map: &M,
) -> Result<Minimum> {
    cfg.validate()?;
    if opts.grid < 9 {
        return Err(Error::Domain("the seeding grid needs at least 9 points per axis"));
    }
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return Err(Error::Domain("golden-section tolerance must lie in (0, 1)"));
    }
    let axes = cfg.bounds().axes();
    let n = opts.grid;
    let mut obj = Objective::new(cfg, mode)?;

    // Grid stage: the d-dependent sums are prepared once per d value.
    let d_values: Vec<f64> = (0..n).map(|i| grid_coord(axes[2].0, axes[2].1, n, i)).collect();
    let per_d = n.pow(4);
    let mut best = ([0.0; 5], f64::INFINITY);
    let mut evals = 0;
    let coords = |idx: usize, d: f64| -> [f64; 5] {
        let mut x = [0.0; 5];
        let mut r = idx;
        for slot in [0usize, 1, 3, 4] {
            x[slot] = grid_coord(axes[slot].0, axes[slot].1, n, r % n);
            r /= n;
        }
        x[2] = d;
        x
    };
    for &d in &d_values {
        let values = match &mut obj {
            Objective::Leading(m) => {
                let (c0v, c2v) = m.constants(d)?;
                let model = &*m;
                map.map(per_d, &|idx| model.psi_with(&to_point(&coords(idx, d)), c0v, c2v))
            }
            Objective::Full(c) => {
                let c = *c;
                map.map(per_d, &|idx| psi_full(&to_point(&coords(idx, d)), &c).unwrap_or(f64::NAN))
            }
        };
        evals += per_d;
        for (idx, v) in values.iter().enumerate() {
            if v.is_nan() {
                return Err(Error::Accuracy { estimate: f64::NAN, error: f64::INFINITY });
            }
            if *v < best.1 {
                best = (coords(idx, d), *v);
            }
        }
    }

    // Refinement stage.
    let (mut x, mut fx) = best;
    for _ in 0..opts.max_sweeps {
        let start = fx;
        for axis in 0..5 {
            let (lo, hi) = axes[axis];
            let base = x;
            let (t, ft, e) = golden(
                |t| {
                    let mut y = base;
                    y[axis] = t;
                    obj.eval(&y)
                },
                lo,
                hi,
                opts.tol * (hi - lo),
            )?;
            evals += e;
            if ft < fx {
                x[axis] = t;
                fx = ft;
            }
        }
        if !(fx < start - 1e-14 * start.abs()) {
            break;
        }
    }

    let argmin = to_point(&x);
    let diagnostics = diagnose(cfg, &argmin, &x, &axes, evals)?;
    Ok(Minimum { argmin, value: fx, mode, diagnostics })
}

fn diagnose(
    cfg: &ReducedConfig,
    p: &ReducedPoint,
    x: &[f64; 5],
    axes: &[(f64, f64); 5],
    evaluations: usize,
) -> Result<Diagnostics> {
    let k = cfg.k as f64;
    let lk = math::ln(k);
    let mut model = LeadingModel::new(cfg)?;
    let eps_star = model.eps_critical(p.d)?;
    let bounds = cfg.bounds();
    let reports: Vec<AxisReport> = (0..5)
        .map(|i| {
            let (lo, hi) = axes[i];
            let from_lo = (x[i] - lo) / (hi - lo);
            let from_hi = (hi - x[i]) / (hi - lo);
            AxisReport {
                name: AXIS_NAMES[i],
                lo,
                hi,
                value: x[i],
                from_lo,
                from_hi,
                interior: from_lo > BOUNDARY_FRACTION && from_hi > BOUNDARY_FRACTION,
            }
        })
        .collect();
    let axes_arr: [AxisReport; 5] = [reports[0], reports[1], reports[2], reports[3], reports[4]];
    Ok(Diagnostics {
        eps_k3: p.eps * k * k * k,
        eps_ratio: p.eps / eps_star,
        kd_offset: k * p.d - lk + 0.5 * math::ln(lk),
        a_fraction: p.a.abs() / (bounds.a_scale * p.eps),
        alpha_b_fraction: p.alpha_b.abs() / bounds.alpha_b,
        alpha_w_fraction: p.alpha_w.abs() / bounds.alpha_w,
        interior: axes_arr.iter().all(|a| a.interior),
        axes: axes_arr,
        evaluations,
    })
}

/// `Ψ` at an interior reference point and at the two faces of one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub interior: f64,
    pub lower_face: f64,
    pub upper_face: f64,
    /// Both faces strictly above the interior value.
    pub holds: bool,
}

impl Comparison {
    fn new(interior: f64, lower_face: f64, upper_face: f64) -> Self {
        Self { interior, lower_face, upper_face, holds: lower_face > interior && upper_face > interior }
    }
}

/// The boundary-versus-interior comparisons of the leading energy.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryComparisons {
    /// `d_ref = (log K − ½ log log K)/K`.
    pub d_ref: f64,
    /// Analytic `ε*(d_ref)`.
    pub eps_star: f64,
    /// Whether `ε*(d_ref)` lies inside the `ε` interval.
    pub eps_star_in_box: bool,
    /// `ε ∈ {δK⁻³, δ⁻¹K⁻³}` against `ε*`, at `d_ref`, `a = α = 0`.
    pub eps: Comparison,
    /// `d ∈ {(log K − log log K)/K, log K/K}` against `d_ref`, at `ε*` clamped to the box.
    pub d: Comparison,
    /// `a = ±δ⁻¹ε log K` against `a = 0`.
    pub a: Comparison,
    /// `(α_w, α_b)` at the four faces (worst case) against `0`.
    pub alpha: Comparison,
}

/// Evaluates [`BoundaryComparisons`] in leading mode.
pub fn boundary_comparisons(cfg: &ReducedConfig) -> Result<BoundaryComparisons> {
    let mut m = LeadingModel::new(cfg)?;
    let bounds = cfg.bounds();
    let k = cfg.k as f64;
    let lk = math::ln(k);
    let d_ref = (lk - 0.5 * math::ln(lk)) / k;
    let eps_star = m.eps_critical(d_ref)?;
    let eps_ref = eps_star.clamp(bounds.eps.0, bounds.eps.1);
    let at = |eps: f64, a: f64, d: f64, alpha_b: f64, alpha_w: f64| ReducedPoint { eps, a, d, alpha_b, alpha_w };

    let eps_cmp = Comparison::new(
        m.psi(&at(eps_star, 0.0, d_ref, 0.0, 0.0))?,
        m.psi(&at(bounds.eps.0, 0.0, d_ref, 0.0, 0.0))?,
        m.psi(&at(bounds.eps.1, 0.0, d_ref, 0.0, 0.0))?,
    );
    let d_cmp = Comparison::new(
        m.psi(&at(eps_ref, 0.0, d_ref, 0.0, 0.0))?,
        m.psi(&at(eps_ref, 0.0, bounds.d.0, 0.0, 0.0))?,
        m.psi(&at(eps_ref, 0.0, bounds.d.1, 0.0, 0.0))?,
    );
    let amax = bounds.a_scale * eps_ref;
    let centre = m.psi(&at(eps_ref, 0.0, d_ref, 0.0, 0.0))?;
    let a_cmp = Comparison::new(
        centre,
        m.psi(&at(eps_ref, -amax, d_ref, 0.0, 0.0))?,
        m.psi(&at(eps_ref, amax, d_ref, 0.0, 0.0))?,
    );
    let mut faces = Vec::new();
    for (ab, aw) in [(bounds.alpha_b, 0.0), (-bounds.alpha_b, 0.0), (0.0, bounds.alpha_w), (0.0, -bounds.alpha_w)] {
        faces.push(m.psi(&at(eps_ref, 0.0, d_ref, ab, aw))?);
    }
    let lowest = |a: f64, b: f64| a.min(b);
    let alpha_cmp = Comparison::new(centre, lowest(faces[0], faces[1]), lowest(faces[2], faces[3]));
    Ok(BoundaryComparisons {
        d_ref,
        eps_star,
        eps_star_in_box: eps_star > bounds.eps.0 && eps_star < bounds.eps.1,
        eps: eps_cmp,
        d: d_cmp,
        a: a_cmp,
        alpha: alpha_cmp,
    })
}

// ---------------------------------------------------------------------------
// C_*(ξ)
// ---------------------------------------------------------------------------

/// Quadrature settings for [`c_star_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CStarConfig {
    /// Relative tolerance of each nested adaptive rule.
    pub rel_tol: f64,
    /// Radius splitting the near field from the tail.
    pub outer_radius: f64,
    /// Tolerance on `|q(ξ)|`.
    pub zero_tol: f64,
}

impl Default for CStarConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-7, outer_radius: 1e3, zero_tol: 1e-8 }
    }
}

/// `C_*` split into the part inside [`CStarConfig::outer_radius`] and the tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CStarReport {
    pub value: f64,
    pub near: f64,
    pub tail: f64,
}

/// `C_*(ξ) = ∫_{ℝ³} q(z+ξ)²/(4π|z|⁴) dz` with default settings.
pub fn c_star(profile: &ProfileHandle, xi: Point3) -> Result<f64> {
    c_star_with(profile, xi, &CStarConfig::default()).map(|r| r.value)
}

/// Centres of the narrow crown bubbles of a profile.
fn narrow_centres(profile: &ProfileHandle) -> Vec<Point3> {
    profile.crown().map(|c| c.xi().to_vec()).unwrap_or_default()
}

fn sorted_breaks(lo: f64, hi: f64, extra: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = extra.filter(|x| *x > lo && *x < hi).collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    let span = hi - lo;
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * span);
    pts
}

/// Smooth cutoff equal to 1 on `[0, ρ/2]` and 0 on `[ρ, ∞)`.
fn cutoff(s: f64, rho: f64) -> f64 {
    let h = 0.5 * rho;
    if s <= h {
        return 1.0;
    }
    if s >= rho {
        return 0.0;
    }
    let t = (s - h) / h;
    let f = |x: f64| if x <= 0.0 { 0.0 } else { math::exp(-1.0 / x) };
    let (a, b) = (f(1.0 - t), f(t));
    a / (a + b)
}

/// Spherical-coordinate integral of `g` over the ball of radius `rho` about a
/// centre in the plane `z₃ = 0`, using evenness in `z₃`.
fn ball_integral<G: Fn(Point3) -> f64>(
    g: G,
    centre: Point3,
    rho: f64,
    radial_breaks: &[f64],
    cfg: &QuadratureConfig,
    outer_cfg: &QuadratureConfig,
) -> Result<f64> {
    let shell = |s: f64| -> f64 {
        let polar = |c: f64| -> f64 {
            let st = math::sqrt((1.0 - c * c).max(0.0));
            let az = |phi: f64| {
                let (sp, cp) = math::sincos(phi);
                g(Point3::new(centre.z1 + s * st * cp, centre.z2 + s * st * sp, s * c))
            };
            integrate(az, 0.0, 2.0 * PI, cfg).unwrap_or(f64::NAN)
        };
        2.0 * s * s * integrate(polar, 0.0, 1.0, cfg).unwrap_or(f64::NAN)
    };
    let breaks = sorted_breaks(0.0, rho, radial_breaks.iter().copied());
    integrate_breaks(shell, &breaks, outer_cfg)
}

/// `∫ q(z+ξ)²/(4π|z|⁴) dz` computed with a smooth partition of unity: each
/// narrow crown bubble is integrated in a ball about its own centre, where its
/// peak is radial, and the smooth remainder in spherical shells about `ξ`.
///
/// Uses evenness of the built-in profiles in `z₃` and, for `ξ` on the `z₁`
/// axis, their mirror symmetry in `z₂`.
pub fn c_star_with(profile: &ProfileHandle, xi: Point3, opts: &CStarConfig) -> Result<CStarReport> {
    let q0 = profile.value(xi);
    if !(q0.abs() <= opts.zero_tol) {
        return Err(Error::Precondition("C_* needs a nodal point: |q(ξ)| exceeds the tolerance"));
    }
    if xi.z3 != 0.0 {
        return Err(Error::Precondition("C_* expects ξ in the plane z₃ = 0"));
    }
    let centres = narrow_centres(profile);
    let mut rho = f64::INFINITY;
    for (i, c) in centres.iter().enumerate() {
        rho = rho.min(0.5 * c.distance(xi));
        for o in &centres[i + 1..] {
            rho = rho.min(0.4 * c.distance(*o));
        }
    }
    if !(rho > 0.0) {
        return Err(Error::Precondition("ξ coincides with a bubble centre"));
    }
    let width = profile.crown().map_or(1.0, |c| c.mu());
    let weight = |x: Point3| -> f64 {
        let r2 = (x - xi).norm2();
        math::sq(profile.value(x)) / (4.0 * PI * r2 * r2)
    };
    // The integrand is of order one away from the peaks; an absolute floor
    // keeps the adaptive rules from chasing negligible regions.
    let cfg = QuadratureConfig::new(1e-7 * opts.rel_tol, 0.1 * opts.rel_tol, 20_000)?;
    let outer_cfg = QuadratureConfig::new(1e-6 * opts.rel_tol, opts.rel_tol, 20_000)?;

    let mut near = 0.0;
    if !centres.is_empty() {
        let radial: Vec<f64> = [1.0, 10.0, 100.0].iter().map(|f| f * width).chain([0.5 * rho]).collect();
        for c in &centres {
            near += ball_integral(|x| weight(x) * cutoff(x.distance(*c), rho), *c, rho, &radial, &cfg, &outer_cfg)?;
        }
    }

    let mirror = xi.z2 == 0.0;
    let phi_hi = if mirror { PI } else { 2.0 * PI };
    let sym = if mirror { 4.0 } else { 2.0 };
    let rho2 = rho * rho;
    let remainder = |x: Point3| -> f64 {
        let mut w = 1.0;
        for c in &centres {
            let s2 = (x - *c).norm2();
            if s2 < rho2 {
                w -= cutoff(math::sqrt(s2), rho);
            }
        }
        if w <= 0.0 {
            0.0
        } else {
            math::sq(profile.value(x)) * w
        }
    };
    // Per-shell absolute budget: errors weighted by 1/(1 + r) over [0, R]
    // add up to rel_tol times the scale of the near-field contribution.
    let scale = if near > 0.0 { near } else { 1e-2 };
    let r_out = opts.outer_radius;
    let log_range = math::ln(1.0 + r_out);
    let shell = |r: f64| -> f64 {
        let budget = opts.rel_tol * scale * 4.0 * PI * r * r / (sym * (1.0 + r) * log_range);
        let cfg = QuadratureConfig { abs_tol: budget.max(f64::MIN_POSITIVE), rel_tol: opts.rel_tol, ..cfg };
        let polar = |c: f64| -> f64 {
            let s = math::sqrt((1.0 - c * c).max(0.0));
            let az = |phi: f64| {
                let (sp, cp) = math::sincos(phi);
                remainder(Point3::new(xi.z1 + r * s * cp, xi.z2 + r * s * sp, r * c))
            };
            integrate(az, 0.0, phi_hi, &cfg).unwrap_or(f64::NAN)
        };
        sym * integrate(polar, 0.0, 1.0, &cfg).unwrap_or(f64::NAN) / (4.0 * PI * r * r)
    };
    let r_breaks = sorted_breaks(
        0.0,
        r_out,
        centres
            .iter()
            .flat_map(|c| {
                let d = c.distance(xi);
                [d - rho, d, d + rho]
            })
            .chain([1.0, 10.0, 100.0]),
    );
    near += integrate_breaks(shell, &r_breaks, &outer_cfg)?;
    let tail = integrate(shell, r_out, f64::INFINITY, &outer_cfg)?;
    if !near.is_finite() || !tail.is_finite() {
        return Err(Error::Accuracy { estimate: near + tail, error: f64::INFINITY });
    }
    Ok(CStarReport { value: near + tail, near, tail })
}

// ---------------------------------------------------------------------------
// Default model constants
// ---------------------------------------------------------------------------

/// Model constants derived from the crown proxy `U_*`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxyConstants {
    pub m: usize,
    pub profile: ProfileHandle,
    /// Outer in-plane nodal point on the ray through the first crown bubble.
    pub xi: Point3,
    pub gnorm: f64,
    pub cstar: f64,
}

/// Bracket, in multiples of the distance to the first bubble centre, for the
/// outward radial root search.
pub fn outer_root_bracket(m: usize) -> (f64, f64) {
    (1e-3 / m as f64, 1.0)
}

/// Locates the outer in-plane nodal point of `U_*` near the first crown bubble
/// and evaluates `|∇U_*(ξ)|` and `C_*(ξ)` there.
pub fn proxy_constants(m: usize) -> Result<ProxyConstants> {
    let params = build_crown(m)?;
    let profile = ProfileHandle::UStar(params.clone());
    let centre = params.xi()[0];
    let dir = centre * (1.0 / centre.norm());
    let t = radial_nodal_root_in(&params, &profile, 0, dir, outer_root_bracket(m), 1e-15)?;
    let xi = centre + dir * t;
    let xi = Point3::new(xi.z1, xi.z2, 0.0);
    let gnorm = profile.gradient(xi).norm();
    let cstar = c_star(&profile, xi)?;
    Ok(ProxyConstants { m, profile, xi, gnorm, cstar })
}
