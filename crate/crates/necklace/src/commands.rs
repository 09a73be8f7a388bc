//! Subcommand implementations. Each returns a [`Report`] and, for `verify`,
//! a failure to be reported after the output has been written.

use std::io::Write;

use necklace_core::crown::{build_crown, psi_d1, u_star, ProfileHandle};
use necklace_core::energy::{
    b_from_d, boundary_comparisons, minimize_psi_with, proxy_constants, psi_full, AxisReport, Comparison, LeadingModel,
    MinimizeConfig, Mode, ReducedConfig, ReducedPoint, AXIS_NAMES,
};
use necklace_core::geometry::SectorConfig;
use necklace_core::kernels::{gamma_bb, h0e_bb, kernel_grad_at, kernel_hess_at, KernelKind, KernelReport, Polar, Slot};
use necklace_core::nodal::Bbox;
use necklace_core::sums::{csc_asym, s1_contour, s_asym, sum_direct, SumSpec, Variant};
use necklace_core::Point3;
use necklace_verify::{nodal_mesh_par, run_all, RayonMap, ALL, QUICK};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_f64, num, Cell, Report, Table};

type Outcome = Result<(Report, Option<CliError>), CliError>;

pub fn execute(cfg: &RunConfig) -> Outcome {
    let report = match cfg.command {
        Command::Sums => sums(cfg)?,
        Command::Ansatz => ansatz(cfg)?,
        Command::Nodal => nodal(cfg)?,
        Command::Kernels => kernels(cfg)?,
        Command::EnergyLandscape => landscape(cfg)?,
        Command::EnergyMinimize => minimize(cfg)?,
        Command::Verify => return verify(cfg),
    };
    Ok((report, None))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn rng(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn sums(cfg: &RunConfig) -> Result<Report, CliError> {
    let variants = cfg
        .str_list("variant")?
        .iter()
        .map(|s| Variant::parse(s).ok_or_else(|| usage(format!("unknown variant '{s}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    let ks: Vec<u32> = cfg.list("k")?;
    let ns: Vec<usize> = cfg.list("n")?;
    let xs: Vec<f64> = cfg.list("x")?;
    let mut t = Table::new(&["variant", "k", "n", "x", "direct", "contour", "asym", "rel_err"]);
    for &v in &variants {
        for &k in &ks {
            for &n in &ns {
                for &x in &xs {
                    let direct = sum_direct(&SumSpec::new(v, k, n, x)?)?;
                    let contour = if v == Variant::Alt && k == 1 && x > 0.0 { Some(s1_contour(n, x)?) } else { None };
                    let asym = if x == 0.0 {
                        csc_asym(v, k, n).ok()
                    } else if v == Variant::Alt && matches!(k, 1 | 3 | 5) {
                        Some(s_asym(k, n, x)?.value)
                    } else {
                        None
                    };
                    let rel = asym.map(|a| (a - direct).abs() / direct.abs());
                    t.push(vec![
                        v.name().into(),
                        k.into(),
                        n.into(),
                        x.into(),
                        direct.into(),
                        contour.into(),
                        asym.into(),
                        rel.into(),
                    ]);
                }
            }
        }
    }
    Ok(Report::Table(t))
}

fn ansatz(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = build_crown(cfg.parse("m")?)?;
    let half: f64 = cfg.parse("bbox")?;
    if !(half > 0.0) {
        return Err(usage("bbox must be positive"));
    }
    let random: usize = cfg.parse("random")?;
    let points: Vec<Point3> = if random > 0 {
        let mut r = rng(cfg);
        (0..random)
            .map(|_| Point3::new(r.random_range(-half..half), r.random_range(-half..half), r.random_range(-half..half)))
            .collect()
    } else {
        let res: usize = cfg.parse("res")?;
        if res < 2 {
            return Err(usage("res must be at least 2"));
        }
        let z3: f64 = cfg.parse("z3")?;
        let coord = |i: usize| -half + 2.0 * half * i as f64 / (res - 1) as f64;
        (0..res).flat_map(|j| (0..res).map(move |i| Point3::new(coord(i), coord(j), z3))).collect()
    };
    let rows: Vec<Vec<Cell>> = points
        .par_iter()
        .map(|&z| {
            let (psi, near) = match psi_d1(z, &p) {
                Ok(v) => (Some(v.value), v.near_pole),
                Err(_) => (None, true),
            };
            vec![z.z1.into(), z.z2.into(), z.z3.into(), u_star(z, &p).into(), psi.into(), near.into()]
        })
        .collect();
    let mut t = Table::new(&["x", "y", "z", "u_star", "psi_d1", "near_pole"]);
    t.rows = rows;
    Ok(Report::Table(t))
}

fn profile(name: &str, m: usize) -> Result<ProfileHandle, CliError> {
    match name {
        "talenti" => Ok(ProfileHandle::Talenti),
        "u_star" => Ok(ProfileHandle::UStar(build_crown(m)?)),
        "u_star_corrected" => Ok(ProfileHandle::UStarCorrected(build_crown(m)?)),
        _ => Err(usage(format!("unknown profile '{name}' (expected u_star, u_star_corrected or talenti)"))),
    }
}

fn nodal(cfg: &RunConfig) -> Result<Report, CliError> {
    let h = profile(&cfg.str("profile")?, cfg.parse("m")?)?;
    let half: f64 = cfg.parse("bbox")?;
    if !(half > 0.0) {
        return Err(usage("bbox must be positive"));
    }
    let mesh = nodal_mesh_par(&h, Bbox::cube(half), cfg.parse("res")?)?;
    if let Some(path) = cfg.params.get("obj") {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "# nodal set of {}: {} vertices", necklace_core::crown::Profile::tag(&h), mesh.len())?;
        for z in &mesh.points {
            writeln!(w, "v {} {} {}", fmt_f64(z.z1), fmt_f64(z.z2), fmt_f64(z.z3))?;
        }
        w.flush()?;
    }
    let mut t = Table::new(&["x", "y", "z", "residual", "gradnorm"]);
    for ((z, r), g) in mesh.points.iter().zip(&mesh.values).zip(&mesh.gradients) {
        t.push(vec![z.z1.into(), z.z2.into(), z.z3.into(), (*r).into(), (*g).into()]);
    }
    Ok(Report::Table(t))
}

const KERNEL_COLUMNS: [&str; 13] = [
    "k",
    "b_norm",
    "d",
    "alpha_b",
    "alpha_w",
    "w_norm",
    "kind",
    "quantity",
    "direct",
    "closed_form",
    "asymptotic",
    "abs_err_dc",
    "abs_err_ca",
];

fn kernel_rows(t: &mut Table, k: usize, d: f64, alpha_b: f64, alpha_w: f64, w_norm: f64) -> Result<(), CliError> {
    let sector = SectorConfig::new(k)?;
    let b = Polar::new(b_from_d(d), alpha_b);
    let w = Polar::new(w_norm, alpha_w);
    let mut push = |kind: &str, quantity: &str, r: KernelReport| {
        t.push(vec![
            k.into(),
            b.norm.into(),
            d.into(),
            alpha_b.into(),
            alpha_w.into(),
            w_norm.into(),
            kind.into(),
            quantity.into(),
            r.direct.into(),
            r.closed_form.into(),
            r.asymptotic.into(),
            r.abs_err_dc.into(),
            r.abs_err_ca.into(),
        ]);
    };
    for (kind, name) in [(KernelKind::Gamma, "gamma"), (KernelKind::H0e, "h0e")] {
        let value = match kind {
            KernelKind::Gamma => gamma_bb(b, &sector)?,
            KernelKind::H0e => h0e_bb(b, &sector)?,
        };
        push(name, "value", value);
        push(name, "grad_z", kernel_grad_at(kind, Slot::Z, b, w, &sector)?);
        push(name, "grad_p", kernel_grad_at(kind, Slot::P, b, w, &sector)?);
        push(name, "hess", kernel_hess_at(kind, b, w, &sector)?);
    }
    Ok(())
}

fn kernels(cfg: &RunConfig) -> Result<Report, CliError> {
    let ks: Vec<usize> = cfg.list("k")?;
    let samples: usize = cfg.parse("samples")?;
    let delta: f64 = cfg.parse("delta")?;
    let mut t = Table::new(&KERNEL_COLUMNS);
    if samples > 0 {
        let mut r = rng(cfg);
        for &k in &ks {
            let bx = ReducedConfig::new(k, 1.0, 1.0, 1.0, delta)?.bounds();
            for _ in 0..samples {
                let d = r.random_range(bx.d.0..bx.d.1);
                let ab = r.random_range(-bx.alpha_b..bx.alpha_b);
                let aw = r.random_range(-bx.alpha_w..bx.alpha_w);
                let w = r.random_range(0.1..1.0);
                kernel_rows(&mut t, k, d, ab, aw, w)?;
            }
        }
    } else {
        let w: f64 = cfg.parse("w")?;
        let alpha_b: Vec<f64> = cfg.list("alpha_b")?;
        let alpha_w: Vec<f64> = cfg.list("alpha_w")?;
        for &k in &ks {
            let ds: Vec<f64> = cfg
                .str_list("d")?
                .iter()
                .map(|s| {
                    if s == "auto" {
                        Ok((k as f64).ln() / k as f64)
                    } else {
                        s.parse().map_err(|_| usage(format!("invalid value '{s}' for 'd'")))
                    }
                })
                .collect::<Result<_, _>>()?;
            for &d in &ds {
                for &ab in &alpha_b {
                    for &aw in &alpha_w {
                        kernel_rows(&mut t, k, d, ab, aw, w)?;
                    }
                }
            }
        }
    }
    Ok(Report::Table(t))
}

/// Reduced-energy configuration plus where its constants came from.
struct EnergySetup {
    cfg: ReducedConfig,
    mode: Mode,
    source: &'static str,
    m: usize,
}

fn energy_setup(cfg: &RunConfig) -> Result<EnergySetup, CliError> {
    let mode_s = cfg.str("mode")?;
    let mode =
        Mode::parse(&mode_s).ok_or_else(|| usage(format!("unknown mode '{mode_s}' (expected leading or full)")))?;
    let m: usize = cfg.parse("m")?;
    let (g, c): (Option<f64>, Option<f64>) = (cfg.opt("gnorm")?, cfg.opt("cstar")?);
    let (gnorm, cstar, source) = match (g, c) {
        (Some(g), Some(c)) => (g, c, "given"),
        _ => {
            let pc = proxy_constants(m)?;
            (g.unwrap_or(pc.gnorm), c.unwrap_or(pc.cstar), if g.is_some() || c.is_some() { "mixed" } else { "proxy" })
        }
    };
    let rc = ReducedConfig::new(cfg.parse("k")?, cfg.parse("lambda")?, gnorm, cstar, cfg.parse("delta")?)?;
    Ok(EnergySetup { cfg: rc, mode, source, m })
}

fn cfg_json(s: &EnergySetup) -> Value {
    json!({
        "k": s.cfg.k,
        "lambda": num(s.cfg.lambda),
        "delta": num(s.cfg.delta),
        "gnorm": num(s.cfg.gnorm),
        "cstar": num(s.cfg.cstar),
        "constants": s.source,
        "m": s.m,
    })
}

fn psi(s: &EnergySetup, model: &mut LeadingModel, p: &ReducedPoint) -> Result<f64, CliError> {
    Ok(match s.mode {
        Mode::Leading => model.psi(p)?,
        Mode::Full => psi_full(p, &s.cfg)?,
    })
}

fn landscape(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = energy_setup(cfg)?;
    let axis = cfg.str("axis")?;
    let ai = AXIS_NAMES
        .iter()
        .position(|a| *a == axis)
        .ok_or_else(|| usage(format!("unknown axis '{axis}' (expected one of {})", AXIS_NAMES.join(", "))))?;
    let points: usize = cfg.parse("points")?;
    if points < 2 {
        return Err(usage("points must be at least 2"));
    }
    let bx = s.cfg.bounds();
    let mut model = LeadingModel::new(&s.cfg)?;
    let k = s.cfg.k as f64;
    let lk = k.ln();
    let d = cfg.opt("d")?.unwrap_or((lk - 0.5 * lk.ln()) / k);
    let eps = match cfg.opt("eps")? {
        Some(e) => e,
        None => model.eps_critical(d)?.clamp(bx.eps.0, bx.eps.1),
    };
    let base = ReducedPoint {
        eps,
        a: cfg.opt("a")?.unwrap_or(0.0),
        d,
        alpha_b: cfg.opt("alpha_b")?.unwrap_or(0.0),
        alpha_w: cfg.opt("alpha_w")?.unwrap_or(0.0),
    };
    let (lo, hi) = bx.axes()[ai];
    let mut t = Table::new(&["axis", "t", "eps", "a", "d", "alpha_b", "alpha_w", "psi"]);
    for i in 0..points {
        let v = if i + 1 == points { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 };
        let mut p = base;
        match ai {
            0 => p.eps = v,
            1 => p.a = v * p.eps,
            2 => p.d = v,
            3 => p.alpha_b = v,
            _ => p.alpha_w = v,
        }
        let val = psi(&s, &mut model, &p)?;
        t.push(vec![
            axis.as_str().into(),
            v.into(),
            p.eps.into(),
            p.a.into(),
            p.d.into(),
            p.alpha_b.into(),
            p.alpha_w.into(),
            val.into(),
        ]);
    }
    Ok(Report::Table(t))
}

fn axis_json(a: &AxisReport) -> Value {
    json!({
        "name": a.name,
        "lo": num(a.lo),
        "hi": num(a.hi),
        "value": num(a.value),
        "from_lo": num(a.from_lo),
        "from_hi": num(a.from_hi),
        "interior": a.interior,
    })
}

fn comparison_json(c: &Comparison) -> Value {
    json!({
        "interior": num(c.interior),
        "lower_face": num(c.lower_face),
        "upper_face": num(c.upper_face),
        "holds": c.holds,
    })
}

fn minimize(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = energy_setup(cfg)?;
    let opts = MinimizeConfig { grid: cfg.parse("grid")?, tol: cfg.parse("tol")?, ..MinimizeConfig::default() };
    let min = minimize_psi_with(&s.cfg, s.mode, &opts, &RayonMap)?;
    let bc = boundary_comparisons(&s.cfg)?;
    let dg = &min.diagnostics;
    let a = &min.argmin;
    let mut cfg_v = cfg_json(&s);
    cfg_v["grid"] = json!(opts.grid);
    cfg_v["tol"] = num(opts.tol);
    Ok(Report::Record(json!({
        "cfg": cfg_v,
        "mode": min.mode.name(),
        "argmin": {
            "eps": num(a.eps),
            "a": num(a.a),
            "d": num(a.d),
            "alpha_b": num(a.alpha_b),
            "alpha_w": num(a.alpha_w),
            "b_norm": num(a.b_norm()),
        },
        "value": num(min.value),
        "diagnostics": {
            "eps_k3": num(dg.eps_k3),
            "eps_ratio": num(dg.eps_ratio),
            "kd_offset": num(dg.kd_offset),
            "a_fraction": num(dg.a_fraction),
            "alpha_b_fraction": num(dg.alpha_b_fraction),
            "alpha_w_fraction": num(dg.alpha_w_fraction),
            "interior": dg.interior,
            "evaluations": dg.evaluations,
            "axes": dg.axes.iter().map(axis_json).collect::<Vec<_>>(),
        },
        "boundary_comparisons": {
            "d_ref": num(bc.d_ref),
            "eps_star": num(bc.eps_star),
            "eps_star_in_box": bc.eps_star_in_box,
            "eps": comparison_json(&bc.eps),
            "d": comparison_json(&bc.d),
            "a": comparison_json(&bc.a),
            "alpha": comparison_json(&bc.alpha),
        },
    })))
}

fn verify(cfg: &RunConfig) -> Outcome {
    let ids: &[u8] = if cfg.quick { &QUICK } else { &ALL };
    let outcomes = run_all(ids, cfg.seed, |o| {
        eprintln!("criterion {:>2} {} [{}] ({:.2} s)", o.id, if o.pass { "PASS" } else { "FAIL" }, o.name, o.seconds);
    });
    let mut t = Table::new(&["criterion", "name", "result", "detail"]);
    for o in &outcomes {
        t.push(vec![
            Cell::I(o.id.into()),
            o.name.into(),
            (if o.pass { "PASS" } else { "FAIL" }).into(),
            o.detail.clone().into(),
        ]);
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id.to_string()).collect();
    let status =
        (!failed.is_empty()).then(|| CliError::Failed(format!("verification failed: criteria {}", failed.join(", "))));
    Ok((Report::Table(t), status))
}
