//! End-to-end exercises of the fzc binary: file formats, pipelines, exit
//! codes, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn fzc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fzc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn fzc")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = fzc(args, dir);
    assert!(
        out.status.success(),
        "fzc {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn sample_expand_reconstruct_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    ok(
        &[
            "sample",
            "--fn",
            "gauss_bump:0.15,0,0",
            "--a",
            "1",
            "--n",
            "128",
            "--support",
            "0.5",
            "--out",
            "bump.fzg",
        ],
        d,
    );
    assert!(d.join("bump.fzg").is_file());

    ok(
        &[
            "expand",
            "--grid",
            "bump.fzg",
            "--kmax",
            "32",
            "--nmax",
            "8",
            "--out",
            "bump.json",
        ],
        d,
    );
    let text = std::fs::read_to_string(d.join("bump.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["n_max"], 8);
    assert_eq!(parsed["coeffs"].as_array().unwrap().len(), 45);

    ok(
        &[
            "reconstruct",
            "--coeffs",
            "bump.json",
            "--grid-out",
            "recon.fzg",
            "--n",
            "64",
            "--points-out",
            "pts.csv",
            "--num-points",
            "40",
            "--seed",
            "7",
        ],
        d,
    );
    assert!(d.join("recon.fzg").is_file());
    let csv = std::fs::read_to_string(d.join("pts.csv")).unwrap();
    assert!(csv.starts_with("r,theta,re,im\n"));
    assert_eq!(csv.lines().count(), 41);

    ok(&["plot", "--grid", "recon.fzg", "--out", "recon.pgm"], d);
    let pgm = std::fs::read(d.join("recon.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n64 64\n255\n"));
    assert!(d.join("recon.pgm.txt").is_file());
}

#[test]
fn disk_indicator_mass_matches_area() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(
        &[
            "sample",
            "--fn",
            "disk_indicator:0.5",
            "--a",
            "1",
            "--n",
            "256",
            "--out",
            "disk.fzg",
        ],
        d,
    );
    // The sample log reports the grid mass; it must sit within 1% of the
    // disk area pi/4.
    let stderr = String::from_utf8_lossy(&out.stderr);
    let mass: f64 = stderr
        .split("mass ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    let area = std::f64::consts::PI / 4.0;
    assert!(
        (mass - area).abs() < 0.01 * area,
        "mass {mass} vs area {area}"
    );
}

#[test]
fn zero_grid_has_zero_mass_and_constant_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &[
            "sample", "--fn", "zero", "--a", "1", "--n", "64", "--out", "z.fzg",
        ],
        d,
    );
    ok(
        &[
            "expand", "--grid", "z.fzg", "--kmax", "16", "--nmax", "4", "--out", "z.json",
        ],
        d,
    );
    let text = std::fs::read_to_string(d.join("z.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    for c in parsed["coeffs"].as_array().unwrap() {
        assert_eq!(c["re"].as_f64().unwrap(), 0.0);
        assert_eq!(c["im"].as_f64().unwrap(), 0.0);
    }
    ok(&["plot", "--grid", "z.fzg", "--out", "z.pgm"], d);
    let pgm = std::fs::read(d.join("z.pgm")).unwrap();
    let header = b"P5\n64 64\n255\n".len();
    assert!(pgm[header..].iter().all(|&b| b == 128));
}

#[test]
fn convolve_routes_agree_on_dominant_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let common = [
        "--f1",
        "gauss_bump:0.12,0.1,0",
        "--f2",
        "gauss_bump:0.12,-0.1,0",
        "--a",
        "1",
        "--n",
        "128",
        "--kmax",
        "32",
        "--nmax",
        "6",
    ];
    for route in ["spectral", "polar", "kernels", "brute"] {
        let mut args: Vec<&str> = vec!["convolve"];
        args.extend_from_slice(&common);
        let out_name = format!("{route}.json");
        let extra = ["--route", route, "--out", &out_name];
        args.extend_from_slice(&extra);
        // Reduced quadrature keeps the polar route quick here.
        let quad = ["--quad-r", "96", "--quad-theta", "192"];
        args.extend_from_slice(&quad);
        ok(&args, d);
    }

    let load = |name: &str| -> Vec<(f64, f64)> {
        let text = std::fs::read_to_string(d.join(name)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["coeffs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| (c["re"].as_f64().unwrap(), c["im"].as_f64().unwrap()))
            .collect()
    };
    let spectral = load("spectral.json");
    let scale = spectral
        .iter()
        .map(|(re, im)| re.hypot(*im))
        .fold(0.0f64, f64::max);
    for route in ["polar", "kernels", "brute"] {
        let other = load(&format!("{route}.json"));
        for ((ar, ai), (br, bi)) in spectral.iter().zip(&other) {
            let mag = ar.hypot(*ai).max(br.hypot(*bi));
            if mag > 1e-3 * scale {
                let err = (ar - br).hypot(ai - bi) / mag;
                assert!(
                    err < 2e-2,
                    "route {route} deviates {err:.3e} at magnitude {mag:.3e}"
                );
            }
        }
    }
}

#[test]
fn kernels_route_accepts_grid_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (name, cx) in [("l", "0.1"), ("r", "-0.1")] {
        ok(
            &["sample", "--fn", &format!("gauss_bump:0.12,{cx},0"), "--a", "1", "--n", "128", "--support", "0.5", "--out", &format!("{name}.fzg")],
            d,
        );
    }
    ok(
        &["convolve", "--f1", "l.fzg", "--f2", "r.fzg", "--a", "1", "--n", "128", "--kmax", "31", "--nmax", "4", "--route", "kernels", "--kernel-dir", "cache", "--out", "k.json"],
        d,
    );
    assert!(d.join("k.json").is_file());
    // The cache directory holds one file per index pair of the input
    // truncation (15 indices at n_max = 4 -> 225 pairs).
    let count = std::fs::read_dir(d.join("cache")).unwrap().count();
    assert_eq!(count, 225);
}

#[test]
fn kernel_table_command_writes_cache() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        &[
            "kernel-table",
            "--left",
            "1,1",
            "--right",
            "2,0",
            "--a",
            "1",
            "--kmax",
            "8",
            "--nmax",
            "4",
            "--dir",
            "kern",
        ],
        d,
    );
    assert!(d.join("kern/kernel_a1_n1m1_n2m0.json").is_file());
}

#[test]
fn verify_subcommand_runs_selected_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["verify", "--suite", "lattice"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().count() >= 3);
    for line in stdout.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["status"], "pass");
        assert_eq!(v["suite"], "lattice");
    }

    let bad = fzc(&["verify", "--suite", "nonsense"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn exit_codes_distinguish_config_and_format_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    // Unknown descriptor: configuration error.
    let out = fzc(
        &[
            "sample", "--fn", "wiggle:1", "--a", "1", "--n", "64", "--out", "x.fzg",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(2));

    // kmax too large for N: configuration error.
    ok(
        &[
            "sample", "--fn", "zero", "--a", "1", "--n", "64", "--out", "z.fzg",
        ],
        d,
    );
    let out = fzc(
        &[
            "expand", "--grid", "z.fzg", "--kmax", "32", "--nmax", "4", "--out", "z.json",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(2));

    // n_max over the ceiling: configuration error.
    let out = fzc(
        &[
            "expand", "--grid", "z.fzg", "--kmax", "16", "--nmax", "31", "--out", "z.json",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(2));

    // Corrupted grid file: format error.
    std::fs::write(d.join("bad.fzg"), b"FZG1 not really").unwrap();
    let out = fzc(
        &[
            "expand", "--grid", "bad.fzg", "--kmax", "8", "--nmax", "4", "--out", "b.json",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(3));

    // Missing grid file: format/i-o error.
    let out = fzc(&["plot", "--grid", "missing.fzg", "--out", "m.pgm"], d);
    assert_eq!(out.status.code(), Some(3));

    // Support violation on convolution inputs.
    let out = fzc(
        &[
            "convolve",
            "--f1",
            "gauss_bump:0.3,0,0",
            "--f2",
            "gauss_bump:0.3,0,0",
            "--a",
            "1",
            "--n",
            "64",
            "--kmax",
            "16",
            "--nmax",
            "4",
            "--support",
            "0.9",
            "--out",
            "c.json",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_configs_produce_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["a", "b"] {
        ok(
            &[
                "sample",
                "--fn",
                "poly_bump:3,1",
                "--a",
                "1",
                "--n",
                "64",
                "--support",
                "0.5",
                "--out",
                &format!("{out}.fzg"),
            ],
            d,
        );
        ok(
            &[
                "expand",
                "--grid",
                &format!("{out}.fzg"),
                "--kmax",
                "16",
                "--nmax",
                "6",
                "--out",
                &format!("{out}.json"),
            ],
            d,
        );
        ok(
            &[
                "reconstruct",
                "--coeffs",
                &format!("{out}.json"),
                "--points-out",
                &format!("{out}.csv"),
                "--num-points",
                "64",
                "--seed",
                "42",
            ],
            d,
        );
    }
    assert_eq!(
        std::fs::read(d.join("a.fzg")).unwrap(),
        std::fs::read(d.join("b.fzg")).unwrap()
    );
    assert_eq!(
        std::fs::read(d.join("a.json")).unwrap(),
        std::fs::read(d.join("b.json")).unwrap()
    );
    assert_eq!(
        std::fs::read(d.join("a.csv")).unwrap(),
        std::fs::read(d.join("b.csv")).unwrap()
    );
}

#[test]
fn thread_cap_env_var_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = Command::new(env!("CARGO_BIN_EXE_fzc"))
        .args([
            "sample",
            "--fn",
            "cosine_hat:2",
            "--a",
            "1",
            "--n",
            "64",
            "--support",
            "0.5",
            "--out",
            "c.fzg",
        ])
        .env("FZC_THREADS", "1")
        .current_dir(d)
        .output()
        .unwrap();
    assert!(out.status.success());

    // The capped run produces the same bytes as an uncapped one.
    let capped = std::fs::read(d.join("c.fzg")).unwrap();
    ok(
        &[
            "sample",
            "--fn",
            "cosine_hat:2",
            "--a",
            "1",
            "--n",
            "64",
            "--support",
            "0.5",
            "--out",
            "u.fzg",
        ],
        d,
    );
    assert_eq!(capped, std::fs::read(d.join("u.fzg")).unwrap());
}
