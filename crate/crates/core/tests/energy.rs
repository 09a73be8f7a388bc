mod common;

use std::f64::consts::PI;

use necklace_core::crown::{u_bubble, ProfileHandle};
use necklace_core::energy::*;
use necklace_core::kernels::s_hat;
use necklace_core::special::{ZETA3, ZETA5};
use necklace_core::Point3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

// Model constants of the order produced by the m = 16 proxy.
const GNORM: f64 = 0.2217;
const CSTAR: f64 = 0.03105;

fn cfg(k: usize, lambda: f64) -> ReducedConfig {
    ReducedConfig::new(k, lambda, GNORM, CSTAR, 0.1).unwrap()
}

fn random_point(r: &mut ChaCha8Rng, c: &ReducedConfig) -> ReducedPoint {
    let b = c.bounds();
    let eps = r.random_range(b.eps.0..b.eps.1);
    ReducedPoint {
        eps,
        a: r.random_range(-1.0..1.0) * b.a_scale * eps,
        d: r.random_range(b.d.0..b.d.1),
        alpha_b: r.random_range(-b.alpha_b..b.alpha_b),
        alpha_w: r.random_range(-b.alpha_w..b.alpha_w),
    }
}

#[test]
fn leading_constants_approach_their_limits() {
    let k = 256usize;
    let kf = k as f64;
    let lk = kf.ln();
    let r0 = c0(k, lk / kf).unwrap() * PI / (kf * 4f64.ln());
    assert!((r0 - 1.0).abs() <= 0.15, "{r0}");
    // The exponential term √(8/π)K³(Kd)^{−1/2}e^{−Kd} is still 4.5% of the
    // leading term at K = 256, d = log K/K; check the two-term expansion there
    // and the one-term limit once that term has decayed.
    let lead = |k: f64| 3.0 * ZETA3 * k.powi(3) / (2.0 * PI.powi(3));
    let expo = |k: f64, d: f64| (8.0 / PI).sqrt() * k.powi(3) * (k * d).powf(-0.5) * (-k * d).exp();
    for d in [lk / kf, (lk - 0.5 * lk.ln()) / kf, (lk - lk.ln()) / kf] {
        let exact = c2(k, d).unwrap();
        let two = lead(kf) + expo(kf, d);
        let corr = (exact - lead(kf)) / expo(kf, d) - 1.0;
        assert!(corr > 0.0 && corr * k as f64 * d <= 1.5, "Kd={}: {corr}", kf * d);
        assert!(common::rel(exact, two) <= 1.5 / (kf * d) * expo(kf, d) / two);
    }
    for k in [512usize, 1024, 4096] {
        let kf = k as f64;
        let r2 = c2(k, kf.ln() / kf).unwrap() / lead(kf);
        assert!((r2 - 1.0).abs() <= 0.05, "K={k}: {r2}");
    }
    let a = a_gamma(k).unwrap();
    let r11 = a[0][0] * 2.0 * PI.powi(3) / (5.0 * ZETA3 * kf.powi(3));
    let r22 = a[1][1] * 8.0 * PI.powi(5) / (93.0 * ZETA5 * kf.powi(5));
    assert!((r11 - 1.0).abs() <= 0.05 && (r22 - 1.0).abs() <= 0.05, "{r11} {r22}");
}

#[test]
fn rescaled_quadratic_form_is_positive_definite() {
    let floor = 0.5 * (5.0 * ZETA3 / (2.0 * PI.powi(3))).min(93.0 * ZETA5 / (8.0 * PI.powi(5)));
    for k in [128usize, 256, 512] {
        let m = a_gamma_hat(k).unwrap();
        let a = a_gamma(k).unwrap();
        assert_eq!(m[0][1], a[0][1] / k as f64);
        let lam = min_eigenvalue(&m);
        assert!(lam >= floor * (k as f64).powi(3), "K={k}: {lam}");
    }
}

#[test]
fn untilted_energy_reduces_to_c2_term() {
    for k in [64usize, 128] {
        let c = cfg(k, 1.0);
        let kf = k as f64;
        let d = kf.ln() / kf;
        let eps = 2.0 / kf.powi(3);
        let p = ReducedPoint { eps, a: 0.0, d, alpha_b: 0.0, alpha_w: 0.0 };
        let b = b_from_d(d);
        let want = eps.powi(3) * GNORM * GNORM / (8.0 * b.powi(3)) * c2(k, d).unwrap() - eps * eps * CSTAR;
        let full = psi_full(&p, &c).unwrap();
        let lead = psi_leading(&p, &c).unwrap();
        assert!(common::rel(full, want) <= 1e-10, "{full} vs {want}");
        assert!(common::rel(lead, want) <= 1e-12);
    }
}

#[test]
fn full_energy_tracks_leading_model() {
    let mut r = common::rng(20);
    let mut consts = Vec::new();
    for k in [64usize, 128, 256] {
        let c = cfg(k, 1.0);
        let kf = k as f64;
        let mut model = LeadingModel::new(&c).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let p = random_point(&mut r, &c);
            let diff = (psi_full(&p, &c).unwrap() - model.psi(&p).unwrap()).abs();
            worst = worst.max(diff / (p.eps.powi(3) * kf * kf.ln().powi(2)));
        }
        consts.push(worst);
    }
    eprintln!("|full − leading|/(ε³K log²K): {consts:?}");
    assert!(consts.iter().all(|&c| c <= 1.0));
}

#[test]
fn angular_dependence_is_quadratic() {
    let k = 128usize;
    let c = cfg(k, 1.0);
    let kf = k as f64;
    let base = ReducedPoint { eps: 1.0 / kf.powi(3), a: 0.0, d: kf.ln() / kf, alpha_b: 0.0, alpha_w: 0.0 };
    let psi0 = psi_full(&base, &c).unwrap();
    let ts = [1e-3, 2e-3, 4e-3, 8e-3];
    for (u, v) in [(1.0, 0.0), (0.0, 1.0), (0.6, 0.8), (0.6, -0.8)] {
        let dv: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let p = ReducedPoint { alpha_w: t * u, alpha_b: t * v / kf, ..base };
                (psi_full(&p, &c).unwrap() - psi0).abs()
            })
            .collect();
        let e = common::loglog_slope(&ts, &dv);
        assert!((e - 2.0).abs() <= 0.1, "({u},{v}): {e}");
    }
}

#[test]
fn analytic_eps_star_is_critical() {
    for k in [64usize, 128, 256] {
        let c = cfg(k, 1.0);
        let mut m = LeadingModel::new(&c).unwrap();
        let kf = k as f64;
        let d = (kf.ln() - 0.5 * kf.ln().ln()) / kf;
        let es = m.eps_critical(d).unwrap();
        let b = b_from_d(d);
        let want = 16.0 * b.powi(3) * CSTAR / (3.0 * GNORM * GNORM * c2(k, d).unwrap());
        assert!(common::rel(es, want) <= 1e-12);
        let h = 1e-5 * es;
        let f = |e: f64| psi_leading(&ReducedPoint { eps: e, a: 0.0, d, alpha_b: 0.0, alpha_w: 0.0 }, &c).unwrap();
        let deriv = (f(es + h) - f(es - h)) / (2.0 * h);
        assert!(deriv.abs() <= 1e-8 * es * CSTAR, "K={k}: {deriv}");
        // a = 0 removes the 𝒞₀ term: Ψ is then independent of the value of 𝒞₀.
        let p = ReducedPoint { eps: es, a: 0.0, d, alpha_b: 0.0, alpha_w: 0.0 };
        let with_a = ReducedPoint { a: 1e-3 * es, ..p };
        let (c0v, _) = m.constants(d).unwrap();
        let gap = m.psi(&with_a).unwrap() - m.psi(&p).unwrap();
        assert!(common::rel(gap, es * (1e-3 * es * GNORM).powi(2) * c0v / (2.0 * b)) <= 1e-6);
    }
}

#[test]
fn energy_is_even_under_joint_tilt_reflection() {
    let mut r = common::rng(21);
    for k in [64usize, 256] {
        let c = cfg(k, 1.0);
        for _ in 0..50 {
            let p = random_point(&mut r, &c);
            let q = ReducedPoint { alpha_b: -p.alpha_b, alpha_w: -p.alpha_w, ..p };
            assert_eq!(psi_leading(&p, &c).unwrap(), psi_leading(&q, &c).unwrap());
            let (a, b) = (psi_full(&p, &c).unwrap(), psi_full(&q, &c).unwrap());
            assert!((a - b).abs() <= 1e-12 * a.abs().max(p.eps.powi(3) * (k as f64).powi(3)), "{a} vs {b}");
        }
    }
}

#[test]
fn reduced_functional_is_affine_in_energy() {
    let c = cfg(64, 1.0);
    let mut r = common::rng(22);
    let q6 = 3f64.powf(1.5) * PI * PI / 4.0;
    let pts: Vec<ReducedPoint> = (0..20).map(|_| random_point(&mut r, &c)).collect();
    let psis: Vec<f64> = pts.iter().map(|p| psi_leading(p, &c).unwrap()).collect();
    let js: Vec<f64> = psis.iter().map(|&v| j_reduced(v, q6)).collect();
    for i in 1..pts.len() {
        let lhs = js[i] - js[0];
        let rhs = 2.0 * PI * (psis[i] - psis[0]);
        assert!((lhs - rhs).abs() <= 1e-12 * q6);
    }
    let argmin = |v: &[f64]| v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert_eq!(argmin(&psis), argmin(&js));
}

#[test]
fn talenti_sixth_power_integral() {
    let got = sixth_power_integral_radial(|r| u_bubble(Point3::new(r, 0.0, 0.0))).unwrap();
    // 4π·3^{3/2}∫r²(1+r²)^{−3}dr with the inner integral equal to π/16.
    let oracle = 4.0 * PI * 3f64.powf(1.5) * PI / 16.0;
    assert!(common::rel(got, oracle) <= 1e-12, "{got} vs {oracle}");
}

#[test]
fn minimiser_is_deterministic_and_reports_position() {
    let c = cfg(64, 1.0);
    let a = minimize_psi(&c, Mode::Leading).unwrap();
    let b = minimize_psi(&c, Mode::Leading).unwrap();
    assert_eq!(a, b);
    assert!(c.bounds().contains(&a.argmin));
    for ax in &a.diagnostics.axes {
        assert!((ax.from_lo + ax.from_hi - 1.0).abs() <= 1e-12);
        assert_eq!(ax.interior, ax.from_lo > BOUNDARY_FRACTION && ax.from_hi > BOUNDARY_FRACTION);
    }
    assert_eq!(a.diagnostics.interior, a.diagnostics.axes.iter().all(|x| x.interior));
    assert!(
        a.value
            <= psi_leading(
                &ReducedPoint { eps: 1.0 / 64f64.powi(3), a: 0.0, d: c.bounds().d.1, alpha_b: 0.0, alpha_w: 0.0 },
                &c
            )
            .unwrap()
    );
    let bad = MinimizeConfig { grid: 5, ..MinimizeConfig::default() };
    assert!(minimize_psi_with(&c, Mode::Leading, &bad, &Serial).is_err());
}

#[test]
fn interiority_is_reported_across_lambda() {
    for lambda in [0.1, 1.0, 10.0] {
        let c = cfg(128, lambda);
        let m = minimize_psi(&c, Mode::Leading).unwrap();
        let flags: Vec<bool> = m.diagnostics.axes.iter().map(|a| a.interior).collect();
        eprintln!("λ={lambda}: interior {flags:?}, εK³={:.3}", m.diagnostics.eps_k3);
        // Tilts and the normal offset sit at the centre for every λ.
        assert!(m.diagnostics.a_fraction <= 1e-2);
        assert!(m.diagnostics.alpha_b_fraction <= 1e-2 && m.diagnostics.alpha_w_fraction <= 1e-2);
    }
}

#[test]
fn boundary_comparisons_for_tilts_and_offset() {
    for k in [128usize, 256] {
        let bc = boundary_comparisons(&cfg(k, 1.0)).unwrap();
        assert!(bc.eps.holds && bc.a.holds && bc.alpha.holds);
        let kf = k as f64;
        assert_eq!(bc.d_ref, (kf.ln() - 0.5 * kf.ln().ln()) / kf);
    }
}

#[test]
fn s_hat_matches_leading_constant() {
    let k = 1024usize;
    let v = s_hat(1, k).unwrap();
    assert!((v - k as f64 / PI * 4f64.ln()).abs() <= 2.0);
}

#[test]
fn c_star_of_crown_proxy() {
    let pc = proxy_constants(16).unwrap();
    assert!(pc.profile.crown().is_some());
    assert!(pc.gnorm > 0.0 && pc.cstar > 0.0);
    let fine = c_star_with(&pc.profile, pc.xi, &CStarConfig { rel_tol: 1e-8, ..CStarConfig::default() }).unwrap();
    assert!(common::rel(pc.cstar, fine.value) <= 1e-6, "{} vs {}", pc.cstar, fine.value);
    assert!(fine.tail >= 0.0 && fine.tail <= 1e-8 * fine.value, "tail {}", fine.tail);
    assert_eq!(fine.value, fine.near + fine.tail);
    // Off the nodal set the integral diverges and is refused.
    assert!(c_star(&pc.profile, pc.xi + Point3::new(0.05, 0.0, 0.0)).is_err());
    assert!(c_star(&ProfileHandle::Talenti, Point3::new(0.5, 0.0, 0.0)).is_err());
}
