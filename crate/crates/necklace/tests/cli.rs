use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn necklace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_necklace")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Parses a CSV without quoted fields into a header and rows.
fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn float(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a float: {s:?}"))
}

#[test]
fn sums_example_row() {
    let o = necklace(&["sums", "--variant", "alt_hat", "--k", "1", "--n", "1024"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv(&stdout(&o));
    assert_eq!(h, ["variant", "k", "n", "x", "direct", "contour", "asym", "rel_err"]);
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    // independent oracle: the alternating cosecant sum in plain f64
    let n = 1024;
    let oracle: f64 = (1..n).map(|j| if j % 2 == 1 { 1.0 } else { -1.0 } / (j as f64 * PI / n as f64).sin()).sum();
    let direct = float(&r[column(&h, "direct")]);
    assert!((direct - oracle).abs() <= 1e-11 * oracle);
    let asym = float(&r[column(&h, "asym")]);
    assert!((asym - n as f64 / PI * 4f64.ln()).abs() < 1e-9);
    assert!(float(&r[column(&h, "rel_err")]) < 1e-5);
    assert_eq!(r[column(&h, "contour")], "");
}

#[test]
fn sums_lists_expand_to_a_product() {
    let o = necklace(&["sums", "--variant", "alt", "--k", "1,3", "--n", "50,200", "--x", "0.05,0.2"]);
    let (h, rows) = csv(&stdout(&o));
    assert_eq!(rows.len(), 8);
    for r in &rows {
        if r[column(&h, "k")] == "1" {
            let (d, c) = (float(&r[column(&h, "direct")]), float(&r[column(&h, "contour")]));
            assert!((d - c).abs() <= 1e-7 * d.abs());
        } else {
            assert_eq!(r[column(&h, "contour")], "");
        }
    }
}

#[test]
fn identical_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = |s: &str| dir.path().join(s).to_str().unwrap().to_string();
    for (name, seed) in [("a.csv", "7"), ("b.csv", "7"), ("c.csv", "8")] {
        let o = necklace(&["ansatz", "--random", "40", "--seed", seed, "--output", &path(name)]);
        assert_eq!(o.status.code(), Some(0));
    }
    let read = |s: &str| std::fs::read(path(s)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_ne!(read("a.csv"), read("c.csv"));
    let o = necklace(&["kernels", "--k", "32", "--samples", "2", "--seed", "3"]);
    assert_eq!(o.stdout, necklace(&["kernels", "--k", "32", "--samples", "2", "--seed", "3"]).stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_necklace"))
            .args(["nodal", "--res", "32"])
            .env("NECKLACE_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# sums run\nvariant = odd\nk = 3\nn = 64\nformat = json\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = necklace(&["sums", "--config", c, "--n", "128"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["variant"], "odd");
    assert_eq!(v[0]["k"], 3);
    assert_eq!(v[0]["n"], 128);
    let o = necklace(&["sums", "--config", c, "--format", "csv"]);
    assert!(stdout(&o).starts_with("variant,k,n"));

    for bad in ["variant = odd\nwidth = 3\n", "k = 3\nk = 5\n", "k 3\n"] {
        std::fs::write(&cfg, bad).unwrap();
        let o = necklace(&["sums", "--config", c]);
        assert_eq!(o.status.code(), Some(2), "{bad:?}");
        assert!(o.stdout.is_empty());
    }
    // a key valid for another subcommand is still unknown here
    std::fs::write(&cfg, "bbox = 2\n").unwrap();
    assert_eq!(necklace(&["sums", "--config", c]).status.code(), Some(2));
    assert_eq!(necklace(&["sums", "--config", "/nonexistent/run.cfg"]).status.code(), Some(2));
}

#[test]
fn usage_and_domain_errors_exit_two() {
    for args in [
        vec!["frobnicate"],
        vec!["sums", "--width", "3"],
        vec!["sums", "--k", "abc"],
        vec!["sums", "--k", "2"],
        vec!["sums", "--variant", "odd", "--n", "7"],
        vec!["sums", "--variant", "sideways"],
        vec!["nodal", "--res", "8"],
        vec!["nodal", "--profile", "gaussian"],
        vec!["ansatz", "--m", "6"],
        vec!["energy"],
        vec!["energy", "minimize", "--gnorm", "0.2", "--cstar", "0.03", "--delta", "2"],
        vec!["energy", "landscape", "--gnorm", "0.2", "--cstar", "0.03", "--axis", "beta"],
        vec!["verify", "--slow"],
    ] {
        let o = necklace(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(necklace(&["--help"]).status.code(), Some(0));
    assert_eq!(necklace(&["energy", "minimize", "--help"]).status.code(), Some(0));
}

#[test]
fn nodal_point_cloud_and_obj() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("nodal.obj");
    let out = dir.path().join("nodal.csv");
    let o = necklace(&[
        "nodal",
        "--m",
        "16",
        "--bbox",
        "2.5",
        "--res",
        "96",
        "--obj",
        obj.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(h, ["x", "y", "z", "residual", "gradnorm"]);
    assert!(rows.len() > 1000);
    for r in &rows {
        let z = [float(&r[0]), float(&r[1]), float(&r[2])];
        assert!(z.iter().all(|c| c.abs() <= 2.5));
        assert!(float(&r[3]) <= 1e-8 && float(&r[4]) > 0.0);
    }
    let text = std::fs::read_to_string(&obj).unwrap();
    let verts: Vec<&str> = text.lines().filter(|l| l.starts_with("v ")).collect();
    assert_eq!(verts.len(), rows.len());
    let first: Vec<f64> = verts[0][2..].split(' ').map(float).collect();
    assert_eq!(first, vec![float(&rows[0][0]), float(&rows[0][1]), float(&rows[0][2])]);

    let o = necklace(&["nodal", "--profile", "talenti", "--res", "16"]);
    assert_eq!(stdout(&o), "x,y,z,residual,gradnorm\n");
}

#[test]
fn energy_minimize_record() {
    let o = necklace(&["energy", "minimize", "--k", "64", "--gnorm", "0.2217", "--cstar", "0.03105"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["cfg", "mode", "argmin", "value", "diagnostics", "boundary_comparisons"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["mode"], "leading");
    assert_eq!(v["cfg"]["constants"], "given");
    assert_eq!(v["cfg"]["k"], 64);
    let k3 = 64f64.powi(3);
    let eps = v["argmin"]["eps"].as_f64().unwrap();
    assert!(eps * k3 >= 0.1 * (1.0 - 1e-12) && eps * k3 <= 10.0 * (1.0 + 1e-12));
    assert_eq!(v["diagnostics"]["axes"].as_array().unwrap().len(), 5);
    assert!(v["value"].as_f64().unwrap() < 0.0);

    let o =
        necklace(&["energy", "minimize", "--k", "64", "--gnorm", "0.2217", "--cstar", "0.03105", "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.starts_with("key,value\n"));
    assert!(text.lines().any(|l| l.starts_with("argmin.eps,")));
    assert!(text.lines().any(|l| l.starts_with("diagnostics.axes.4.name,alpha_w")));
}

#[test]
fn energy_landscape_sweep() {
    let o = necklace(&[
        "energy",
        "landscape",
        "--gnorm",
        "0.2217",
        "--cstar",
        "0.03105",
        "--axis",
        "alpha_w",
        "--points",
        "11",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv(&stdout(&o));
    assert_eq!(rows.len(), 11);
    let psi: Vec<f64> = rows.iter().map(|r| float(&r[column(&h, "psi")])).collect();
    // even in alpha_w with its minimum at the centre
    for i in 0..5 {
        assert!((psi[i] - psi[10 - i]).abs() <= 1e-12 * psi[5].abs());
        assert!(psi[i] > psi[5]);
    }
}

#[test]
fn kernel_samples() {
    let o = necklace(&["kernels", "--k", "32,64", "--samples", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = csv(&stdout(&o));
    assert_eq!(rows.len(), 2 * 3 * 8);
    for r in &rows {
        let err = float(&r[column(&h, "abs_err_dc")]);
        let tol = match r[column(&h, "quantity")].as_str() {
            "value" => 1e-11,
            "hess" => 1e-3,
            _ => 1e-4,
        };
        assert!(err <= tol, "{r:?}");
    }
    let o = necklace(&["kernels", "--k", "64", "--alpha-b", "0,1e-4", "--alpha-w", "0,0.01"]);
    assert_eq!(csv(&stdout(&o)).1.len(), 4 * 8);
}

#[test]
fn ansatz_grid() {
    let o = necklace(&["ansatz", "--m", "16", "--res", "5", "--bbox", "1", "--z3", "0.25"]);
    let (h, rows) = csv(&stdout(&o));
    assert_eq!(h, ["x", "y", "z", "u_star", "psi_d1", "near_pole"]);
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| float(&r[2]) == 0.25 && r[5] == "false"));
    assert_eq!(float(&rows[0][0]), -1.0);
    assert_eq!(float(&rows[24][1]), 1.0);
}

#[test]
fn quick_verification_reports_each_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let o = necklace(&["verify", "--quick", "--format", "json", "-o", out.to_str().unwrap()]);
    let v: Value = serde_json::from_slice(&std::fs::read(Path::new(&out)).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let failed = rows.iter().filter(|r| r["result"] == "FAIL").count();
    assert!(rows.iter().all(|r| r["result"] == "PASS" || r["result"] == "FAIL"));
    // exit status follows the table
    assert_eq!(o.status.code(), Some(if failed == 0 { 0 } else { 1 }));
}
