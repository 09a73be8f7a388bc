// SPDX-License-Identifier: Apache-2.0

//! Zero level sets of a profile: radial roots near a crown bubble and point
//! clouds obtained from sign changes along the edges of a uniform grid.

use alloc::vec::Vec;

use crate::crown::{fd_gradient, CrownParams, Profile};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::math;

/// Default radial search interval is `[RADIAL_BRACKET_INNER / m, RADIAL_BRACKET_OUTER]`.
pub const RADIAL_BRACKET_INNER: f64 = 1e-3;
pub const RADIAL_BRACKET_OUTER: f64 = 0.5;
/// Sample count of the logarithmic scan that brackets a radial root.
const RADIAL_SCAN_SAMPLES: usize = 512;

/// Residual accepted for mesh points.
pub const MESH_RESIDUAL_TOL: f64 = 1e-8;

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Offset `t` of the first zero of `t ↦ profile(ξ_j + t·direction)` in the default bracket.
pub fn radial_nodal_root<P: Profile + ?Sized>(
    p: &CrownParams,
    profile: &P,
    j: usize,
    direction: Point3,
) -> Result<f64> {
    let lo = RADIAL_BRACKET_INNER / p.m() as f64;
    radial_nodal_root_in(p, profile, j, direction, (lo, RADIAL_BRACKET_OUTER), 1e-12)
}

/// Offset of the first zero of `t ↦ profile(ξ_j + t·direction)` for `t` in
/// `bracket`, located by a logarithmic sign-change scan and bisection to `tol`.
/// `j` indexes [`CrownParams::xi`] from zero.
pub fn radial_nodal_root_in<P: Profile + ?Sized>(
    p: &CrownParams,
    profile: &P,
    j: usize,
    direction: Point3,
    bracket: (f64, f64),
    tol: f64,
) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain("radial bracket must satisfy 0 < lo < hi"));
    }
    if direction.z3.abs() > 1e-12 {
        return Err(Error::Domain("radial direction must lie in the z1z2-plane"));
    }
    let n = direction.norm();
    if !(n > 0.0) {
        return Err(Error::Domain("radial direction must be nonzero"));
    }
    let centre = *p.xi().get(j).ok_or(Error::Domain("bubble index out of range"))?;
    let dir = direction * (1.0 / n);
    let f = |t: f64| profile.value(centre + dir * t);
    let ratio = math::ln(hi / lo);
    let mut t_prev = lo;
    let mut f_prev = f(lo);
    for i in 1..=RADIAL_SCAN_SAMPLES {
        let t = lo * math::exp(ratio * i as f64 / RADIAL_SCAN_SAMPLES as f64);
        let ft = f(t);
        if f_prev == 0.0 {
            return Ok(t_prev);
        }
        if (ft < 0.0) != (f_prev < 0.0) || ft == 0.0 {
            return Ok(bisect(f, t_prev, t, tol));
        }
        t_prev = t;
        f_prev = ft;
    }
    Err(Error::NotFound("profile keeps its sign along the radial bracket"))
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bbox {
    pub min: Point3,
    pub max: Point3,
}

impl Bbox {
    /// `[−h, h]³`.
    pub fn cube(half: f64) -> Self {
        Self { min: Point3::new(-half, -half, -half), max: Point3::new(half, half, half) }
    }

    pub fn contains(&self, z: Point3) -> bool {
        z.z1 >= self.min.z1
            && z.z1 <= self.max.z1
            && z.z2 >= self.min.z2
            && z.z2 <= self.max.z2
            && z.z3 >= self.min.z3
            && z.z3 <= self.max.z3
    }
}

/// Approximate zeros of a profile with residuals and gradient norms.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalMesh {
    pub points: Vec<Point3>,
    /// `|u|` at each point.
    pub values: Vec<f64>,
    /// `|∇u|` at each point, by central differences.
    pub gradients: Vec<f64>,
    pub bbox: Bbox,
    /// Cells per axis.
    pub resolution: usize,
}

impl NodalMesh {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Concatenates slab results in slab order.
    pub fn from_slabs<I: IntoIterator<Item = NodalSlab>>(bbox: Bbox, resolution: usize, slabs: I) -> Self {
        let mut mesh = NodalMesh { points: Vec::new(), values: Vec::new(), gradients: Vec::new(), bbox, resolution };
        for s in slabs {
            mesh.points.extend(s.points);
            mesh.values.extend(s.values);
            mesh.gradients.extend(s.gradients);
        }
        mesh
    }

    pub fn max_residual(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Points found in one slab `x ∈ [x_i, x_{i+1})` of the grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodalSlab {
    pub points: Vec<Point3>,
    pub values: Vec<f64>,
    pub gradients: Vec<f64>,
}

/// Smallest supported grid resolution.
pub const MIN_RESOLUTION: usize = 16;

struct Grid {
    bbox: Bbox,
    n: usize,
}

impl Grid {
    fn new(bbox: Bbox, n: usize) -> Self {
        Self { bbox, n }
    }

    // Nodes are computed from the index so that both resolutions of a
    // refinement pair share bit-identical coordinates on common nodes.
    fn coord(&self, axis: usize, i: usize) -> f64 {
        let (lo, hi) = match axis {
            0 => (self.bbox.min.z1, self.bbox.max.z1),
            1 => (self.bbox.min.z2, self.bbox.max.z2),
            _ => (self.bbox.min.z3, self.bbox.max.z3),
        };
        if i == self.n {
            hi
        } else {
            lo + (hi - lo) * (i as f64 / self.n as f64)
        }
    }

    fn node(&self, i: usize, j: usize, k: usize) -> Point3 {
        Point3::new(self.coord(0, i), self.coord(1, j), self.coord(2, k))
    }
}

fn plane_values<P: Profile + ?Sized>(g: &Grid, profile: &P, i: usize) -> Vec<f64> {
    let m = g.n + 1;
    let mut v = Vec::with_capacity(m * m);
    for j in 0..m {
        for k in 0..m {
            v.push(profile.value(g.node(i, j, k)));
        }
    }
    v
}

fn refine_edge<P: Profile + ?Sized>(profile: &P, a: Point3, b: Point3, out: &mut NodalSlab) {
    let f = |t: f64| profile.value(a + (b - a) * t);
    let t = bisect(f, 0.0, 1.0, 1e-15);
    let z = a + (b - a) * t;
    let v = profile.value(z).abs();
    if v <= MESH_RESIDUAL_TOL {
        out.points.push(z);
        out.values.push(v);
        out.gradients.push(fd_gradient(|x| profile.value(x), z).norm());
    }
}

#[inline]
fn changes_sign(a: f64, b: f64) -> bool {
    (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)
}

/// Sign-change points on the grid edges owned by slab `i`: edges along y and
/// z in the plane `x = x_i`, and edges along x from `x_i` to `x_{i+1}`.
pub fn nodal_slab<P: Profile + ?Sized>(profile: &P, bbox: Bbox, resolution: usize, i: usize) -> NodalSlab {
    let g = Grid::new(bbox, resolution);
    let m = resolution + 1;
    let mut out = NodalSlab::default();
    if i > resolution {
        return out;
    }
    let here = plane_values(&g, profile, i);
    let next = if i < resolution { Some(plane_values(&g, profile, i + 1)) } else { None };
    for j in 0..m {
        for k in 0..m {
            let v = here[j * m + k];
            if k + 1 < m && changes_sign(v, here[j * m + k + 1]) {
                refine_edge(profile, g.node(i, j, k), g.node(i, j, k + 1), &mut out);
            }
            if j + 1 < m && changes_sign(v, here[(j + 1) * m + k]) {
                refine_edge(profile, g.node(i, j, k), g.node(i, j + 1, k), &mut out);
            }
            if let Some(nx) = &next {
                if changes_sign(v, nx[j * m + k]) {
                    refine_edge(profile, g.node(i, j, k), g.node(i + 1, j, k), &mut out);
                }
            }
        }
    }
    out
}

/// Scans the grid slab by slab. An empty mesh is a valid result.
pub fn nodal_mesh<P: Profile + ?Sized>(profile: &P, bbox: Bbox, resolution: usize) -> Result<NodalMesh> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::Domain("nodal mesh resolution must be at least 16"));
    }
    Ok(NodalMesh::from_slabs(bbox, resolution, (0..=resolution).map(|i| nodal_slab(profile, bbox, resolution, i))))
}

/// Number of lowest mesh points used as seeds by [`gradient_min_on_nodal`].
const POLISH_SEEDS: usize = 8;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

// Newton steps along the gradient back onto `u = 0`.
fn project<F: Fn(Point3) -> f64>(f: &F, mut z: Point3) -> Point3 {
    for _ in 0..8 {
        let v = f(z);
        if v.abs() <= 1e-14 {
            break;
        }
        let g = fd_gradient(f, z);
        let g2 = g.norm2();
        if !(g2 > 0.0) {
            break;
        }
        z = z - g * (v / g2);
    }
    z
}

// Unit tangents orthogonal to `g`.
fn tangents(g: Point3) -> (Point3, Point3) {
    let n = g * (1.0 / g.norm());
    let seed = if n.z3.abs() < 0.9 { Point3::E3 } else { Point3::E1 };
    let t1 = seed - n * seed.dot(n);
    let t1 = t1 * (1.0 / t1.norm());
    let t2 = Point3::new(n.z2 * t1.z3 - n.z3 * t1.z2, n.z3 * t1.z1 - n.z1 * t1.z3, n.z1 * t1.z2 - n.z2 * t1.z1);
    (t1, t2)
}

/// Local minimisation of `|∇u|` on the zero set from `z0`, alternating
/// golden-section searches along two tangent directions of width `step`.
pub fn polish_gradient_min<P: Profile + ?Sized>(profile: &P, z0: Point3, step: f64) -> (Point3, f64) {
    let f = |x: Point3| profile.value(x);
    let grad = |x: Point3| fd_gradient(f, x).norm();
    let mut z = project(&f, z0);
    let mut best = grad(z);
    let mut width = step;
    for _ in 0..60 {
        let before = best;
        let (t1, t2) = tangents(fd_gradient(f, z));
        for dir in [t1, t2] {
            let phi = |t: f64| {
                let p = project(&f, z + dir * t);
                (p, grad(p))
            };
            let (mut lo, mut hi) = (-width, width);
            let mut c = hi - GOLDEN * (hi - lo);
            let mut d = lo + GOLDEN * (hi - lo);
            let (mut fc, mut fd) = (phi(c).1, phi(d).1);
            for _ in 0..40 {
                if fc < fd {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - GOLDEN * (hi - lo);
                    fc = phi(c).1;
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + GOLDEN * (hi - lo);
                    fd = phi(d).1;
                }
            }
            let (p, v) = phi(0.5 * (lo + hi));
            if v < best && f(p).abs() <= MESH_RESIDUAL_TOL {
                z = p;
                best = v;
            }
        }
        if before - best <= 1e-13 {
            if width < 1e-6 * step {
                break;
            }
            width *= 0.5;
        }
    }
    (z, best)
}

/// Minimum of `|∇u|` on the nodal set sampled by the mesh. The lowest mesh
/// values (central differences) seed [`polish_gradient_min`], so the result
/// does not depend on where the grid lines happen to cut the surface.
pub fn gradient_min_on_nodal<P: Profile + ?Sized>(mesh: &NodalMesh, profile: &P) -> Result<f64> {
    if mesh.is_empty() {
        return Err(Error::Domain("empty nodal mesh"));
    }
    let f = |x: Point3| profile.value(x);
    let mut scored: Vec<(f64, Point3)> = mesh.points.iter().map(|&z| (fd_gradient(f, z).norm(), z)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = scored[0].0;
    let span = (mesh.bbox.max - mesh.bbox.min).norm() / mesh.resolution as f64;
    for &(_, z) in scored.iter().take(POLISH_SEEDS) {
        best = best.min(polish_gradient_min(profile, z, span).1);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crown::ProfileHandle;

    #[test]
    fn talenti_has_no_zeros() {
        let m = nodal_mesh(&ProfileHandle::Talenti, Bbox::cube(2.0), 16).unwrap();
        assert!(m.is_empty());
        assert!(gradient_min_on_nodal(&m, &ProfileHandle::Talenti).is_err());
    }

    #[test]
    fn low_resolution_rejected() {
        assert!(nodal_mesh(&ProfileHandle::Talenti, Bbox::cube(1.0), 8).is_err());
    }
}
