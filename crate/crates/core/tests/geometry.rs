mod common;

use std::f64::consts::PI;

use necklace_core::geometry::{conj, extend_odd, kelvin, rotate};
use necklace_core::{Point3, SectorConfig};
use rand::Rng;

#[test]
fn rotation_examples_and_group_law() {
    let z = Point3::new(0.3, -1.2, 0.7);
    assert_eq!(rotate(z, 0.0), z);
    let mut r = common::rng(1);
    for _ in 0..200 {
        let z = common::point_in_cube(&mut r, 2.0);
        let (a, b) = (r.random_range(-7.0..7.0), r.random_range(-7.0..7.0));
        let lhs = rotate(rotate(z, a), b);
        let rhs = rotate(z, a + b);
        assert!(lhs.distance(rhs) < 1e-14 * (1.0 + z.norm()), "{lhs:?} {rhs:?}");
        assert!((rotate(z, a).norm() - z.norm()).abs() < 1e-14);
        assert_eq!(rotate(z, a).z3, z.z3);
    }
}

#[test]
fn conjugation_and_inversion_are_involutions() {
    let mut r = common::rng(2);
    for _ in 0..200 {
        let z = common::point_in_cube(&mut r, 3.0);
        assert_eq!(conj(conj(z)), z);
        assert_eq!(conj(z).norm(), z.norm());
        let k = kelvin(z).unwrap();
        assert!(kelvin(k).unwrap().distance(z) < 1e-14 * z.norm().max(1.0));
        assert!((k.norm() - 1.0 / z.norm()).abs() < 1e-14 / z.norm());
    }
}

#[test]
fn odd_extension_of_constant_vanishes() {
    let mut r = common::rng(3);
    for k in [4, 8, 32] {
        let cfg = SectorConfig::new(k).unwrap();
        for _ in 0..20 {
            let z = common::point_in_cube(&mut r, 0.6);
            assert_eq!(extend_odd(|_| Ok(1.0), z, &cfg).unwrap(), 0.0);
        }
    }
}

#[test]
fn odd_extension_is_odd_across_odd_rays() {
    let smooth = |p: Point3| Ok((0.7 * p.z1).sin() + p.z2 * p.z2 * 1.3 + p.z1 * p.z2 + (p.z3 + 0.2 * p.z1).cos());
    let mut r = common::rng(4);
    for k in [8, 16] {
        let cfg = SectorConfig::new(k).unwrap();
        let th0 = cfg.theta0();
        for _ in 0..100 {
            let z = common::point_in_cube(&mut r, 0.5);
            let j = 2 * r.random_range(0..k) + 1;
            let ray = j as f64 * th0;
            // reflection across the ray at angle `ray`
            let reflected = rotate(conj(rotate(z, -ray)), ray);
            let a = extend_odd(smooth, z, &cfg).unwrap();
            let b = extend_odd(smooth, reflected, &cfg).unwrap();
            assert!((a + b).abs() < 1e-12, "K={k} j={j}: {a} {b}");
        }
        let on_ray = Point3::polar(0.4, th0) + Point3::new(0.0, 0.0, -0.3);
        assert!(extend_odd(smooth, on_ray, &cfg).unwrap().abs() < 1e-12);
    }
}

#[test]
fn images_enumerate_k_points_on_the_same_sphere() {
    let cfg = SectorConfig::new(12).unwrap();
    let z = Point3::new(0.4, 0.05, 0.1);
    let imgs: Vec<_> = cfg.images(z).collect();
    assert_eq!(imgs.len(), 12);
    assert_eq!(imgs[0], (1.0, z));
    assert_eq!(imgs.iter().filter(|(s, _)| *s < 0.0).count(), 6);
    for (_, p) in &imgs {
        assert!((p.norm() - z.norm()).abs() < 1e-15);
    }
    assert!((cfg.theta0() - PI / 12.0).abs() == 0.0);
}
