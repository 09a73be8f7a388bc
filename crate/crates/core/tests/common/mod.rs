#![allow(dead_code)]

use necklace_core::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn point_in_cube(r: &mut ChaCha8Rng, half: f64) -> Point3 {
    Point3::new(r.random_range(-half..half), r.random_range(-half..half), r.random_range(-half..half))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Seven-point Laplacian.
pub fn fd_laplacian<F: Fn(Point3) -> f64>(f: F, z: Point3, h: f64) -> f64 {
    let e = [Point3::E1, Point3::E2, Point3::E3];
    let c = f(z);
    e.iter().map(|&d| f(z + d * h) + f(z - d * h) - 2.0 * c).sum::<f64>() / (h * h)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
