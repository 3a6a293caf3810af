//! End-to-end runs of the `heis` binary.

use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

fn heis(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_heis"))
        .current_dir(dir)
        .env_remove("HEIS_CONFIG")
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn setup() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    (dir, path)
}

#[test]
fn gaussian_signal_and_hermite_zero() {
    let (_tmp, d) = setup();
    assert_eq!(heis(&d, &["gen", "gaussian", "g.csv"]).0, 0);
    assert_eq!(heis(&d, &["gen", "hermite:0", "h.csv"]).0, 0);
    let g = rows(&d.join("g.csv"));
    let origin = g.iter().find(|r| r[0] == 0.0).unwrap();
    assert_eq!(origin[1], 2f64.powf(0.25));
    assert_eq!(std::fs::read(d.join("g.csv")).unwrap(), std::fs::read(d.join("h.csv")).unwrap());
    assert_eq!(heis(&d, &["gen", "hermite:40", "x.csv"]).0, 3);
    assert_eq!(heis(&d, &["gen", "sawtooth", "x.csv"]).0, 3);
}

#[test]
fn zak_roundtrip_through_csv() {
    let (_tmp, d) = setup();
    heis(&d, &["gen", "gaussian", "g.csv"]);
    assert_eq!(heis(&d, &["zak", "--m", "1", "g.csv", "z.csv"]).0, 0);
    let text = std::fs::read_to_string(d.join("z.csv")).unwrap();
    assert!(text.starts_with("# m=1\nu,v,re,im\n"));
    assert_eq!(heis(&d, &["izak", "z.csv", "back.csv"]).0, 0);
    let (a, b) = (rows(&d.join("g.csv")), rows(&d.join("back.csv")));
    assert_eq!(a.len(), b.len());
    let norm: f64 = a.iter().map(|r| r[1] * r[1] + r[2] * r[2]).sum::<f64>().sqrt();
    let diff: f64 = a.iter().zip(&b).map(|(x, y)| (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sum::<f64>().sqrt();
    assert!(diff <= 1e-6 * norm, "{diff}");
}

#[test]
fn theta_vacuum_header_and_index_checks() {
    let (_tmp, d) = setup();
    assert_eq!(heis(&d, &["gen", "theta-vacuum", "--m", "2", "--torus-nu", "32", "--torus-nv", "32", "--line-n", "512", "t.csv"]).0, 0);
    assert!(std::fs::read_to_string(d.join("t.csv")).unwrap().starts_with("# m=2\n"));
    // the header sets m; a conflicting flag is malformed input
    assert_eq!(heis(&d, &["peel-lattice", "t.csv", "p.csv"]).0, 0);
    assert_eq!(heis(&d, &["peel-lattice", "--m", "3", "t.csv", "p.csv"]).0, 2);
    assert_eq!(heis(&d, &["peel-lattice", "--inverse", "p.csv", "q.csv"]).0, 0);
    let (a, b) = (rows(&d.join("t.csv")), rows(&d.join("q.csv")));
    for (x, y) in a.iter().zip(&b) {
        assert!((x[2] - y[2]).abs() < 1e-14 && (x[3] - y[3]).abs() < 1e-14);
    }
}

#[test]
fn pretheta_pair_recovers_the_vacuum() {
    let (_tmp, d) = setup();
    let grid = ["--torus-nu", "32", "--torus-nv", "32", "--line-n", "512", "--plane-nx", "64", "--plane-ny", "64", "--plane-lx", "4", "--plane-ly", "4"];
    let with = |extra: &[&'static str]| -> Vec<&'static str> { [extra, &grid[..]].concat() };
    assert_eq!(heis(&d, &with(&["gen", "theta-vacuum", "t.csv"])).0, 0);
    assert_eq!(heis(&d, &with(&["pretheta", "t.csv", "w.csv"])).0, 0);
    assert_eq!(heis(&d, &with(&["ipretheta", "w.csv", "back.csv"])).0, 0);
    let (a, b) = (rows(&d.join("t.csv")), rows(&d.join("back.csv")));
    let err = a.iter().zip(&b).map(|(x, y)| (x[2] - y[2]).abs().max((x[3] - y[3]).abs())).fold(0.0, f64::max);
    assert!(err < 1e-3, "{err}");
}

#[test]
fn fourier_pair_and_peelings() {
    let (_tmp, d) = setup();
    let small = r#"{"line_n": 512, "torus_nu": 32, "torus_nv": 32, "plane_nx": 32, "plane_ny": 32}"#;
    std::fs::write(d.join("small.json"), small).unwrap();
    let run = |args: &[&str]| heis(&d, &[&["--config", "small.json"][..], args].concat()).0;
    assert_eq!(run(&["gen", "hermite:2", "h.csv"]), 0);
    assert_eq!(run(&["fourier", "h.csv", "w.csv"]), 0);
    assert_eq!(run(&["ifourier", "w.csv", "back.csv"]), 0);
    let (a, b) = (rows(&d.join("h.csv")), rows(&d.join("back.csv")));
    let err = a.iter().zip(&b).map(|(x, y)| (x[1] - y[1]).abs().max((x[2] - y[2]).abs())).fold(0.0, f64::max);
    assert!(err < 1e-7, "{err}");
    assert_eq!(run(&["peel-schrodinger", "h.csv", "p.csv"]), 0);
    assert_eq!(run(&["prefsb", "h.csv", "pf.csv"]), 0);
    assert_eq!(run(&["peel-fsb", "pf.csv", "f1.csv"]), 0);
    assert_eq!(run(&["fsb", "h.csv", "f2.csv"]), 0);
    assert_eq!(std::fs::read(d.join("f1.csv")).unwrap(), std::fs::read(d.join("f2.csv")).unwrap());
}

#[test]
fn malformed_inputs_exit_2() {
    let (_tmp, d) = setup();
    std::fs::write(d.join("missing.csv"), "t,re\n0,1\n1,1\n").unwrap();
    std::fs::write(d.join("garbage.csv"), "t,re,im\n0,1,zz\n").unwrap();
    std::fs::write(d.join("torus.csv"), "u,v,re,im\n0,0,1,0\n0,0.5,1,0\n").unwrap();
    assert_eq!(heis(&d, &["zak", "missing.csv", "o.csv"]).0, 2);
    assert_eq!(heis(&d, &["zak", "garbage.csv", "o.csv"]).0, 2);
    assert_eq!(heis(&d, &["izak", "torus.csv", "o.csv"]).0, 2);
    assert_eq!(heis(&d, &["zak", "nonexistent.csv", "o.csv"]).0, 2);
    heis(&d, &["gen", "gaussian", "g.csv"]);
    // a line where a torus is expected
    assert_eq!(heis(&d, &["izak", "g.csv", "o.csv"]).0, 2);
}

#[test]
fn config_failures_exit_3() {
    let (_tmp, d) = setup();
    assert_eq!(heis(&d, &["verify", "nope"]).0, 3);
    assert_eq!(heis(&d, &["--kappa", "-1", "verify", "group"]).0, 3);
    assert_eq!(heis(&d, &["verify", "group", "--torus-nu", "96"]).0, 3);
    assert_eq!(heis(&d, &["verify", "group", "--tol", "oops"]).0, 3);
    std::fs::write(d.join("bad.json"), r#"{"hbar": 1, "color": "red"}"#).unwrap();
    assert_eq!(heis(&d, &["--config", "bad.json", "verify", "group"]).0, 3);
    let out = Command::new(env!("CARGO_BIN_EXE_heis"))
        .current_dir(&d)
        .env("HEIS_CONFIG", d.join("bad.json"))
        .args(["verify", "group"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn numerical_guards_exit_4() {
    let (_tmp, d) = setup();
    let wide = ["--line-l", "30", "--line-n", "7680"];
    assert_eq!(heis(&d, &[&["gen", "gaussian"][..], &wide[..], &["g.csv"][..]].concat()).0, 0);
    assert_eq!(heis(&d, &[&["peel-schrodinger"][..], &wide[..], &["g.csv", "p.csv"][..]].concat()).0, 4);
    let slow = SampledLineCsv::constant(-30.0, 7680, 60.0);
    std::fs::write(d.join("flat.csv"), slow).unwrap();
    assert_eq!(heis(&d, &["zak", "--ntrunc", "2", "flat.csv", "z.csv"]).0, 4);
}

struct SampledLineCsv;

impl SampledLineCsv {
    fn constant(origin: f64, n: usize, width: f64) -> String {
        let step = width / n as f64;
        let mut s = String::from("t,re,im\n");
        for k in 0..n {
            s.push_str(&format!("{:.16e},1,0\n", origin + k as f64 * step));
        }
        s
    }
}

#[test]
fn verify_reports_and_flags() {
    let (_tmp, d) = setup();
    std::fs::write(d.join("cfg.json"), r#"{"seed": 7, "hbar": 3.0}"#).unwrap();
    let (code, stdout, _) = heis(&d, &["--config", "cfg.json", "--seed", "9", "verify", "group", "--report", "r.json"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("PASS group.associativity"));
    let reports: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    let first = &reports.as_array().unwrap()[0];
    // flags win over the file
    assert_eq!(first["metadata"]["seed"], 9);
    assert_eq!(heis(&d, &["verify", "group", "--tol", "group=0"]).0, 1);
}
