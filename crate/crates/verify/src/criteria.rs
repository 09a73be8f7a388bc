use std::f64::consts::PI;
use std::fmt::Write;
use std::time::Instant;

use necklace_core::crown::{build_crown, psi_d11, u_bubble, u_star, ProfileHandle};
use necklace_core::energy::{
    b_from_d, boundary_comparisons, minimize_psi_with, outer_root_bracket, proxy_constants, BoxBounds, MinimizeConfig,
    Mode, ReducedConfig,
};
use necklace_core::geometry::{kelvin, SectorConfig};
use necklace_core::kernels::{
    gamma_bb, h0e_bb, kernel_grad_at, kernel_hess_at, t_a, KernelKind, PlacedBubble, Polar, Slot, GRAD_TOL, HESS_TOL,
};
use necklace_core::nodal::{gradient_min_on_nodal, radial_nodal_root_in, Bbox, MESH_RESIDUAL_TOL};
use necklace_core::special::{ZETA3, ZETA5};
use necklace_core::sums::{csc_asym, s1_contour, s_asym, sum_direct, SumSpec, Variant};
use necklace_core::{Point3, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::parallel::{nodal_mesh_par, RayonMap};

pub(crate) struct Check {
    pub pass: bool,
    pub detail: String,
}

type CriterionFn = fn(u64) -> Result<Check>;

pub(crate) const TABLE: [(u8, &str, CriterionFn); 10] = [
    (1, "series constants", series_constants),
    (2, "contour identity", contour_identity),
    (3, "exponential asymptotics", exponential_asymptotics),
    (4, "explicit correction", explicit_correction),
    (5, "kelvin invariance", kelvin_invariance),
    (6, "kernel resummation", kernel_resummation),
    (7, "derivative reports", derivative_reports),
    (8, "image-sum bounds", image_sum_bounds),
    (9, "reduced-energy scaling", reduced_energy_scaling),
    (10, "nodal set", nodal_set),
];

const DELTA: f64 = 0.1;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn direct(v: Variant, k: u32, n: usize, x: f64) -> Result<f64> {
    sum_direct(&SumSpec::new(v, k, n, x)?)
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn within_budget(start: Instant, seconds: f64, pass: bool, detail: &mut String) -> bool {
    if start.elapsed().as_secs_f64() >= seconds {
        let _ = write!(detail, "; over the {seconds} s budget");
        return false;
    }
    pass
}

fn series_constants(_seed: u64) -> Result<Check> {
    let start = Instant::now();
    let n = 2048;
    let nf = n as f64;
    let r = [
        direct(Variant::Odd, 3, n, 0.0)? * 4.0 * PI.powi(3) / (7.0 * ZETA3 * nf.powi(3)),
        direct(Variant::EvenHat, 3, n, 0.0)? * 4.0 * PI.powi(3) / (ZETA3 * nf.powi(3)),
        direct(Variant::Odd, 5, n, 0.0)? * 48.0 * PI.powi(5) / (93.0 * ZETA5 * nf.powi(5)),
    ];
    let mut dev: f64 = 0.0;
    for n in [256, 512, 1024, 2048, 4096] {
        dev = dev.max((direct(Variant::AltHat, 1, n, 0.0)? - csc_asym(Variant::AltHat, 1, n)?).abs());
    }
    let pass = r.iter().all(|v| (0.999..=1.001).contains(v)) && dev <= 2.0;
    let mut detail = format!("ratios {:.6} {:.6} {:.6}; max |S1hat - (n/pi) log 4| = {dev:.4}", r[0], r[1], r[2]);
    let pass = within_budget(start, 2.0, pass, &mut detail);
    Ok(Check { pass, detail })
}

fn contour_identity(_seed: u64) -> Result<Check> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [10, 50, 200] {
        for x in [0.05, 0.2, 1.0] {
            let d = direct(Variant::Alt, 1, n, x)?;
            worst = worst.max((s1_contour(n, x)? - d).abs() / d.abs());
        }
    }
    let mut detail = format!("max relative error {worst:.3e}");
    let pass = within_budget(start, 5.0, worst <= 1e-7, &mut detail);
    Ok(Check { pass, detail })
}

fn exponential_asymptotics(_seed: u64) -> Result<Check> {
    let n = 4000;
    let nxs = [15.0, 25.0, 40.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [1, 3, 5] {
        let mut errs = Vec::new();
        let mut scaled: f64 = 0.0;
        for nx in nxs {
            let x = nx / n as f64;
            let e = (s_asym(k, n, x)?.value / direct(Variant::Alt, k, n, x)? - 1.0).abs();
            scaled = scaled.max(e * nx / 3.0);
            errs.push(e);
        }
        let slope = loglog_slope(&nxs, &errs);
        pass &= scaled <= 1.0 && (-1.3..=-0.7).contains(&slope);
        parts.push(format!("k={k}: max err/(3/nx) {scaled:.3}, slope {slope:.3}"));
    }
    Ok(Check { pass, detail: parts.join("; ") })
}

fn explicit_correction(seed: u64) -> Result<Check> {
    let h = 1e-3;
    let e = [Point3::E1, Point3::E2, Point3::E3];
    let mut r = rng(seed, 4);
    let (mut n, mut bad) = (0, 0);
    let (mut worst, mut worst_dist) = (0.0f64, 0.0);
    let mut nearest_ok = f64::INFINITY;
    // Distance to the pole uniform on (0.3, 1.3], direction uniform, poles
    // alternating, so every seed samples the whole distance range.
    while n < 200 {
        let u = Point3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let un = u.norm();
        if !(un > 1e-3 && un <= 1.0) {
            continue;
        }
        let pole = if n % 2 == 0 { Point3::E1 } else { -Point3::E1 };
        let z = pole + u * ((1.3 - r.random_range(0.0..1.0)) / un);
        let dist = z.distance(Point3::E1).min(z.distance(-Point3::E1));
        n += 1;
        let c = psi_d11(z)?;
        let lap = e.iter().map(|&d| Ok(psi_d11(z + d * h)? + psi_d11(z - d * h)? - 2.0 * c)).sum::<Result<f64>>()?;
        let res = (lap / (h * h) + 5.0 * u_bubble(z).powi(4) * c).abs();
        if res > 100.0 * h * h {
            bad += 1;
        } else {
            nearest_ok = nearest_ok.min(dist);
        }
        if res > worst {
            worst = res;
            worst_dist = dist;
        }
    }
    let mut coef = Vec::new();
    for d in e.iter().flat_map(|&d| [d, -d]) {
        coef.push(psi_d11(Point3::E1 + d * 1e-3)? * 1e-3);
    }
    let (lo, hi) = coef.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &c| (a.min(c), b.max(c)));
    let pass = bad == 0 && lo >= -1.01 && hi <= -0.99;
    let detail = format!(
        "{bad}/200 points above 100 h^2; max residual/h^2 {:.1} at distance {worst_dist:.3}; \
         smallest passing distance {nearest_ok:.3}; pole coefficients in [{lo:.5}, {hi:.5}]",
        worst / (h * h)
    );
    Ok(Check { pass, detail })
}

fn kelvin_invariance(seed: u64) -> Result<Check> {
    let p = build_crown(16)?;
    let mut r = rng(seed, 5);
    let (mut wu, mut ws): (f64, f64) = (0.0, 0.0);
    let mut n = 0;
    while n < 1000 {
        let z = Point3::new(r.random_range(-2.5..2.5), r.random_range(-2.5..2.5), r.random_range(-2.5..2.5));
        if z.norm() < 1e-3 {
            continue;
        }
        n += 1;
        let k = kelvin(z)?;
        wu = wu.max((u_bubble(z) - u_bubble(k) / z.norm()).abs());
        ws = ws.max((u_star(z, &p) - u_star(k, &p) / z.norm()).abs());
    }
    Ok(Check { pass: wu <= 1e-12 && ws <= 1e-12, detail: format!("max residual U {wu:.2e}, U_* (m=16) {ws:.2e}") })
}

fn bounds(k: usize) -> Result<BoxBounds> {
    Ok(ReducedConfig::new(k, 1.0, 1.0, 1.0, DELTA)?.bounds())
}

fn random_b(r: &mut ChaCha8Rng, bx: &BoxBounds) -> Polar {
    let d = r.random_range(bx.d.0..bx.d.1);
    Polar::new(b_from_d(d), r.random_range(-bx.alpha_b..bx.alpha_b))
}

fn kernel_resummation(seed: u64) -> Result<Check> {
    let k = 64;
    let cfg = SectorConfig::new(k)?;
    let bx = bounds(k)?;
    let mut r = rng(seed, 6);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let b = random_b(&mut r, &bx);
        worst = worst.max(gamma_bb(b, &cfg)?.abs_err_dc).max(h0e_bb(b, &cfg)?.abs_err_dc);
    }
    let kf = k as f64;
    let bn = b_from_d(kf.ln() / kf);
    let alphas: Vec<f64> = [0.02, 0.04, 0.08, 0.16].iter().map(|s| s * cfg.theta0()).collect();
    let mut exps = Vec::new();
    for f in [gamma_bb, h0e_bb] {
        let rem = alphas
            .iter()
            .map(|&a| f(Polar::new(bn, a), &cfg).map(|x| (x.direct - x.asymptotic).abs()))
            .collect::<Result<Vec<_>>>()?;
        exps.push(loglog_slope(&alphas, &rem));
    }
    let pass = worst <= 1e-11 && exps.iter().all(|e| (1.9..=2.1).contains(e));
    Ok(Check {
        pass,
        detail: format!("max abs_err_dc {worst:.2e}; alpha_b exponents gamma {:.3}, h0e {:.3}", exps[0], exps[1]),
    })
}

fn derivative_reports(seed: u64) -> Result<Check> {
    let mut r = rng(seed, 7);
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [32, 64] {
        let cfg = SectorConfig::new(k)?;
        let bx = bounds(k)?;
        let (mut wg, mut wh): (f64, f64) = (0.0, 0.0);
        for _ in 0..40 {
            let b = random_b(&mut r, &bx);
            let w = Polar::new(r.random_range(0.1..1.0), r.random_range(-bx.alpha_w..bx.alpha_w));
            for kind in [KernelKind::Gamma, KernelKind::H0e] {
                for slot in [Slot::Z, Slot::P] {
                    wg = wg.max(kernel_grad_at(kind, slot, b, w, &cfg)?.abs_err_dc);
                }
                wh = wh.max(kernel_hess_at(kind, b, w, &cfg)?.abs_err_dc);
            }
        }
        pass &= wg <= GRAD_TOL && wh <= HESS_TOL;
        parts.push(format!("K={k}: grad {wg:.2e}, hess {wh:.2e}"));
    }
    Ok(Check { pass, detail: parts.join("; ") })
}

fn image_sum_bounds(seed: u64) -> Result<Check> {
    let k = 64;
    let kf = k as f64;
    let cfg = SectorConfig::new(k)?;
    let eps = kf.powi(-3);
    let p = build_crown(16)?;
    let profile = ProfileHandle::UStar(p.clone());
    let centre = p.xi()[0];
    let dir = centre * (1.0 / centre.norm());
    let t = radial_nodal_root_in(&p, &profile, 0, dir, outer_root_bracket(16), 1e-15)?;
    let b = Polar::new(b_from_d(kf.ln() / kf), 1e-4);
    let bubble = PlacedBubble::from_profile(profile, centre + dir * t, eps, 0.5 * eps * kf.ln(), b, 0.0)?;
    let mut r = rng(seed, 8);
    let (mut size, mut rem, mut rem_closed): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut n = 0;
    while n < 1000 {
        let rho: f64 = r.random_range(0.0..1.0);
        let th = r.random_range(-cfg.theta0()..cfg.theta0());
        let z = Point3::new(rho * th.cos(), rho * th.sin(), r.random_range(-1.0..1.0));
        if !cfg.contains(z) {
            continue;
        }
        n += 1;
        let t = t_a(z, &bubble, &cfg)?;
        size = size.max(t.direct.abs() / (eps.powf(1.5) * kf * kf));
        rem = rem.max((t.direct - t.asymptotic).abs() / (eps.powf(3.5) * kf.powi(4)));
        rem_closed = rem_closed.max(t.abs_err_dc / (eps.powf(3.5) * kf.powi(4)));
    }
    let pass = size <= 50.0 && rem <= 50.0;
    let detail = format!(
        "sup|T_A|/(eps^1.5 K^2) {size:.4}; sup|direct - expansion|/(eps^3.5 K^4) {rem:.4} \
         (exact second-order Taylor form {rem_closed:.2e})"
    );
    Ok(Check { pass, detail })
}

fn reduced_energy_scaling(_seed: u64) -> Result<Check> {
    let start = Instant::now();
    let pc = proxy_constants(16)?;
    let mut pass = true;
    let mut parts = vec![format!("gnorm {:.6}, cstar {:.6}", pc.gnorm, pc.cstar)];
    for k in [64, 128, 256] {
        let cfg = ReducedConfig::new(k, 1.0, pc.gnorm, pc.cstar, DELTA)?;
        let min = minimize_psi_with(&cfg, Mode::Leading, &MinimizeConfig::default(), &RayonMap)?;
        let dg = &min.diagnostics;
        let cmp = boundary_comparisons(&cfg)?;
        let edges: Vec<&str> = dg.axes.iter().filter(|a| !a.interior).map(|a| a.name).collect();
        let ratio_ok = (0.9..=1.1).contains(&dg.eps_ratio);
        let kd_ok = dg.kd_offset.abs() <= 3.0;
        let small_ok = dg.a_fraction <= 1e-2 && dg.alpha_b_fraction <= 1e-2 && dg.alpha_w_fraction <= 1e-2;
        let held = [("eps", cmp.eps.holds), ("d", cmp.d.holds), ("a", cmp.a.holds), ("alpha", cmp.alpha.holds)];
        let failed: Vec<&str> = held.iter().filter(|h| !h.1).map(|h| h.0).collect();
        pass &= dg.interior && ratio_ok && kd_ok && small_ok && failed.is_empty();
        parts.push(format!(
            "K={k}: boundary axes [{}], eps_ratio {:.3}, kd_offset {:.3}, fractions a {:.1e} alpha_b {:.1e} alpha_w {:.1e}, \
             failed comparisons [{}]",
            edges.join(" "),
            dg.eps_ratio,
            dg.kd_offset,
            dg.a_fraction,
            dg.alpha_b_fraction,
            dg.alpha_w_fraction,
            failed.join(" ")
        ));
    }
    let mut detail = parts.join("; ");
    let pass = within_budget(start, 60.0, pass, &mut detail);
    Ok(Check { pass, detail })
}

fn nodal_set(_seed: u64) -> Result<Check> {
    let profile = ProfileHandle::UStar(build_crown(16)?);
    let bbox = Bbox::cube(2.5);
    let coarse = nodal_mesh_par(&profile, bbox, 96)?;
    let fine = nodal_mesh_par(&profile, bbox, 192)?;
    if coarse.is_empty() || fine.is_empty() {
        return Ok(Check { pass: false, detail: format!("empty mesh ({} / {} points)", coarse.len(), fine.len()) });
    }
    let g96 = gradient_min_on_nodal(&coarse, &profile)?;
    let g192 = gradient_min_on_nodal(&fine, &profile)?;
    let resid = coarse.max_residual();
    let pass = resid <= MESH_RESIDUAL_TOL && g96 > 0.0 && (g96 - g192).abs() <= 1e-6;
    let detail = format!(
        "{} points, max residual {resid:.1e}; min |grad| {g96:.9} at 96, {g192:.9} at 192 (change {:.1e})",
        coarse.len(),
        (g96 - g192).abs()
    );
    Ok(Check { pass, detail })
}
