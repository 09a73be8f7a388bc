// SPDX-License-Identifier: Apache-2.0

//! Points of ℝ³ with a complex view of the first two coordinates, the
//! rotations and reflections that generate the sector images, the Kelvin
//! inversion, and the odd extension `u ↦ uᵉ` over a sector of opening 2π/K.

use core::f64::consts::PI;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::math;

/// A point of ℝ³. The pair `(z1, z2)` is read as the complex number
/// `z1 + i z2` whenever a rotation or conjugation is applied.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { z1: 0.0, z2: 0.0, z3: 0.0 };
    pub const E1: Point3 = Point3 { z1: 1.0, z2: 0.0, z3: 0.0 };
    pub const E2: Point3 = Point3 { z1: 0.0, z2: 1.0, z3: 0.0 };
    pub const E3: Point3 = Point3 { z1: 0.0, z2: 0.0, z3: 1.0 };

    #[inline]
    pub const fn new(z1: f64, z2: f64, z3: f64) -> Self {
        Self { z1, z2, z3 }
    }

    /// In-plane point `r e^{iθ}` with zero third coordinate.
    #[inline]
    pub fn polar(r: f64, theta: f64) -> Self {
        let (s, c) = math::sincos(theta);
        Self::new(r * c, r * s, 0.0)
    }

    #[inline]
    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    #[inline]
    pub fn to_array(self) -> [f64; 3] {
        [self.z1, self.z2, self.z3]
    }

    #[inline]
    pub fn dot(self, o: Point3) -> f64 {
        self.z1 * o.z1 + self.z2 * o.z2 + self.z3 * o.z3
    }

    #[inline]
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::sqrt(self.norm2())
    }

    /// Distance `|(z1, z2)|` from the z₃ axis.
    #[inline]
    pub fn planar_radius(self) -> f64 {
        math::hypot(self.z1, self.z2)
    }

    /// Argument of `z1 + i z2` in `(-π, π]`.
    #[inline]
    pub fn angle(self) -> f64 {
        math::atan2(self.z2, self.z1)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.z1.is_finite() && self.z2.is_finite() && self.z3.is_finite()
    }

    #[inline]
    pub fn distance(self, o: Point3) -> f64 {
        (self - o).norm()
    }
}

impl Add for Point3 {
    type Output = Point3;
    #[inline]
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.z1 + o.z1, self.z2 + o.z2, self.z3 + o.z3)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    #[inline]
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.z1 - o.z1, self.z2 - o.z2, self.z3 - o.z3)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    #[inline]
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.z1 * s, self.z2 * s, self.z3 * s)
    }
}

impl Mul<Point3> for f64 {
    type Output = Point3;
    #[inline]
    fn mul(self, p: Point3) -> Point3 {
        p * self
    }
}

impl Neg for Point3 {
    type Output = Point3;
    #[inline]
    fn neg(self) -> Point3 {
        Point3::new(-self.z1, -self.z2, -self.z3)
    }
}

/// `z e^{iθ}`: rotation of `(z1, z2)` by `theta`, `z3` unchanged.
#[inline]
pub fn rotate(z: Point3, theta: f64) -> Point3 {
    let (s, c) = math::sincos(theta);
    Point3::new(c * z.z1 - s * z.z2, s * z.z1 + c * z.z2, z.z3)
}

/// `z̄ = (z1, -z2, z3)`.
#[inline]
pub fn conj(z: Point3) -> Point3 {
    Point3::new(z.z1, -z.z2, z.z3)
}

/// Kelvin inversion `z / |z|²`.
pub fn kelvin(z: Point3) -> Result<Point3> {
    let r2 = z.norm2();
    if r2 == 0.0 || !r2.is_finite() {
        return Err(Error::Domain("kelvin transform of the origin"));
    }
    Ok(z * (1.0 / r2))
}

/// Row-major 3×3 matrix.
pub type Mat3 = [[f64; 3]; 3];

/// `M v`.
#[inline]
pub fn mat_vec(m: &Mat3, v: Point3) -> Point3 {
    Point3::new(
        m[0][0] * v.z1 + m[0][1] * v.z2 + m[0][2] * v.z3,
        m[1][0] * v.z1 + m[1][1] * v.z2 + m[1][2] * v.z3,
        m[2][0] * v.z1 + m[2][1] * v.z2 + m[2][2] * v.z3,
    )
}

/// `uᵀ M v`.
#[inline]
pub fn bilinear(m: &Mat3, u: Point3, v: Point3) -> f64 {
    u.dot(mat_vec(m, v))
}

/// `R_θᵀ M R_θ` for the in-plane rotation `R_θ`.
pub fn conjugate_by_rotation(m: &Mat3, theta: f64) -> Mat3 {
    let cols = [rotate(Point3::E1, theta), rotate(Point3::E2, theta), Point3::E3];
    let mut out = [[0.0; 3]; 3];
    for (i, ci) in cols.iter().enumerate() {
        for (j, cj) in cols.iter().enumerate() {
            out[i][j] = bilinear(m, *ci, *cj);
        }
    }
    out
}

/// Sector `Σ_K` of opening `2θ₀`, `θ₀ = π/K`, K even.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorConfig {
    k: usize,
    theta0: f64,
}

/// Angular tolerance applied on the rays `θ = ±θ₀` by [`SectorConfig::contains`].
pub const SECTOR_BOUNDARY_TOL: f64 = 1e-12;

impl SectorConfig {
    pub fn new(k: usize) -> Result<Self> {
        if k < 4 || k % 2 != 0 {
            return Err(Error::Domain("sector count K must be even and at least 4"));
        }
        Ok(Self { k, theta0: PI / k as f64 })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// Membership in the open sector: `|z| < 1`, `0 < r`, `-θ₀ < θ < θ₀`,
    /// with the rays widened by [`SECTOR_BOUNDARY_TOL`].
    pub fn contains(&self, z: Point3) -> bool {
        let r = z.planar_radius();
        if !(r > 0.0) || z.norm2() >= 1.0 {
            return false;
        }
        let th = z.angle();
        th > -self.theta0 - SECTOR_BOUNDARY_TOL && th < self.theta0 + SECTOR_BOUNDARY_TOL
    }

    /// The rotations `e^{4jiθ₀}` (sign +1) and reflections `z̄ e^{(4j+2)iθ₀}`
    /// (sign −1) of the odd extension, in the order `j = 0, 1, …, K/2 − 1`.
    pub fn images(&self, z: Point3) -> impl Iterator<Item = (f64, Point3)> + '_ {
        let zb = conj(z);
        (0..self.k / 2).flat_map(move |j| {
            let rot = rotate(z, 4.0 * j as f64 * self.theta0);
            let refl = rotate(zb, (4 * j + 2) as f64 * self.theta0);
            [(1.0, rot), (-1.0, refl)]
        })
    }
}

/// Odd extension `uᵉ(z) = Σ_{j=0}^{K/2−1} [u(z e^{4jiθ₀}) − u(z̄ e^{(4j+2)iθ₀})]`.
pub fn extend_odd<F>(mut u: F, z: Point3, cfg: &SectorConfig) -> Result<f64>
where
    F: FnMut(Point3) -> Result<f64>,
{
    let mut acc = crate::sums::NeumaierSum::default();
    for (sign, img) in cfg.images(z) {
        acc.add(sign * u(img)?);
    }
    Ok(acc.value())
}
