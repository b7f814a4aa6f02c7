use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SETTINGS: [&str; 16] = [
    "HH", "HV", "VH", "VV", "HD", "HL", "VD", "VL", "DH", "LH", "DV", "LV", "DD", "LR", "RA", "AR",
];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biphoton"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", stderr(&out));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, name: &str, extra: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut args = vec!["simulate", "--out", s(&path)];
    args.extend_from_slice(extra);
    ok(&args);
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(dir.path(), "a.json", &["--state", "phi-", "--seed", "7"]);
    let b = simulate(dir.path(), "b.json", &["--state", "phi-", "--seed", "7"]);
    let c = simulate(dir.path(), "c.json", &["--state", "phi-", "--seed", "8"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn high_count_reconstruction_finds_the_state() {
    let dir = tempfile::tempdir().unwrap();
    let rec = simulate(dir.path(), "rec.json", &["--state", "phi-", "--pairs", "1e6", "--seed", "3"]);
    let out = dir.path().join("rho.json");
    ok(&["reconstruct", "--record", s(&rec), "--target", "phi-", "--out", s(&out)]);
    let v = read_json(&out);
    assert!(v["mle"]["physical"].as_bool().unwrap());
    assert!(v["fidelity"]["mle"].as_f64().unwrap() > 0.99);
}

#[test]
fn identical_histograms_reconstruct_to_the_mixed_state() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let mut text = String::from("bin_index,count\n");
    for i in 0..300 {
        let count = if (20..60).contains(&i) { 140 } else { 40 };
        text.push_str(&format!("{i},{count}\n"));
    }
    std::fs::write(&csv, text).unwrap();
    let pairs: Vec<String> = SETTINGS.iter().map(|name| format!("{name}={}", s(&csv))).collect();
    let out = dir.path().join("rho.json");
    let mut args = vec!["reconstruct", "--window", "20,60", "--tail", "100,300", "--out", s(&out)];
    for p in &pairs {
        args.push("--csv");
        args.push(p);
    }
    ok(&args);
    let v = read_json(&out);
    for which in ["linear", "mle"] {
        let rho = &v[which]["rho"];
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 0.25 } else { 0.0 };
                let re = rho["re"][i][j].as_f64().unwrap();
                let im = rho["im"][i][j].as_f64().unwrap();
                assert!((re - expected).abs() < 0.01 && im.abs() < 0.01, "{which} ({i},{j})");
            }
        }
    }
}

#[test]
fn malformed_record_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let rec = simulate(dir.path(), "rec.json", &["--state", "phi+"]);
    let mut v = read_json(&rec);
    v.as_object_mut().unwrap().remove("window");
    std::fs::write(&rec, v.to_string()).unwrap();
    let out = run(&["reconstruct", "--record", s(&rec)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("window"), "{}", stderr(&out));
}

#[test]
fn missing_file_is_an_io_error() {
    let out = run(&["reconstruct", "--record", "/nonexistent/rec.json"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn unknown_state_is_a_validation_error() {
    let out = run(&["simulate", "--state", "chi+"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_trial_report_has_zero_spread() {
    let dir = tempfile::tempdir().unwrap();
    let rec = simulate(dir.path(), "rec.json", &["--state", "psi+", "--seed", "1"]);
    let json = dir.path().join("report.json");
    let out = ok(&["report", "--record", s(&rec), "--target", "psi+", "--trials", "1", "--out", s(&json)]);
    let v = read_json(&json);
    assert_eq!(v["fidelity_std"].as_f64().unwrap(), 0.0);
    assert_eq!(v["chsh_std"].as_f64().unwrap(), 0.0);
    assert!(stdout(&out).contains("trials   1 (0 failed)"));
}

#[test]
fn report_prints_parenthesized_uncertainties() {
    let dir = tempfile::tempdir().unwrap();
    let rec = simulate(dir.path(), "rec.json", &["--state", "phi-", "--keep", "0.9", "--seed", "2"]);
    let out = ok(&[
        "report", "--record", s(&rec), "--target", "phi-", "--trials", "50", "--resample", "raw-bins",
        "--method", "linear",
    ]);
    let text = stdout(&out);
    let f_line = text.lines().find(|l| l.starts_with("F = ")).unwrap();
    let s_line = text.lines().find(|l| l.starts_with("S = ")).unwrap();
    let value = f_line.trim_start_matches("F = ").split_whitespace().next().unwrap();
    assert!(value.ends_with(")%") && value.contains('('), "{f_line}");
    assert!(s_line.trim_start_matches("S = ").starts_with("2."), "{s_line}");
    assert!(text.contains("method   linear, raw-bins resampling"));
}

#[test]
fn report_rejects_unknown_resampler() {
    let dir = tempfile::tempdir().unwrap();
    let rec = simulate(dir.path(), "rec.json", &["--state", "phi-"]);
    let out = run(&["report", "--record", s(&rec), "--target", "phi-", "--resample", "bootstrap"]);
    assert_eq!(out.status.code(), Some(2));
}

fn bell_fidelity(out: &Output, name: &str) -> String {
    stdout(out)
        .lines()
        .find_map(|l| {
            let mut parts = l.split_whitespace();
            (parts.next() == Some(name)).then(|| parts.next().unwrap().to_string())
        })
        .unwrap()
}

#[test]
fn oam_map_truth_table() {
    let out = ok(&["oam-map"]);
    assert_eq!(bell_fidelity(&out, "phi+"), "1.000");
    assert_eq!(bell_fidelity(&out, "psi-"), "0.000");
    let out = ok(&["oam-map", "--rotated", "--theta", "3.14159265"]);
    assert_eq!(bell_fidelity(&out, "psi-"), "1.000");
    let out = ok(&["oam-map", "--theta", "-3.14159265", "--json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["fidelities"]["phi-"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["success_weight"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn oam_map_without_first_order_is_empty() {
    let out = run(&["oam-map", "--c0", "1", "--c1", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oam_map_reads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("chain.json");
    std::fs::write(&cfg, r#"{ "c": { "0": 0.5, "1": 1.0 }, "rotated": true, "theta_rad": 0.0 }"#).unwrap();
    let out = ok(&["oam-map", "--config", s(&cfg)]);
    assert_eq!(bell_fidelity(&out, "psi+"), "1.000");
}

fn read_pgm(path: &Path) -> (usize, usize, Vec<u8>) {
    let bytes = std::fs::read(path).unwrap();
    let header = b"P5\n";
    assert!(bytes.starts_with(header));
    let text = String::from_utf8_lossy(&bytes[..32.min(bytes.len())]).into_owned();
    let mut lines = text.lines().skip(1);
    let dims: Vec<usize> = lines.next().unwrap().split(' ').map(|x| x.parse().unwrap()).collect();
    let maxval = lines.next().unwrap();
    assert_eq!(maxval, "255");
    let offset = header.len() + format!("{} {}\n255\n", dims[0], dims[1]).len();
    (dims[0], dims[1], bytes[offset..].to_vec())
}

#[test]
fn holo_writes_pgm_masks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lh.pgm");
    ok(&["holo", "--kind", "lh", "--size", "64x48", "--out", s(&path)]);
    let (w, h, px) = read_pgm(&path);
    assert_eq!((w, h, px.len()), (64, 48, 64 * 48));
    assert!(px.iter().any(|&p| p > 128) && px.iter().any(|&p| p < 128));
}

#[test]
fn rotated_dual_mask_is_binary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dual.pgm");
    ok(&["holo", "--kind", "dual", "--rot", "--size", "40x40", "--out", s(&path)]);
    let (_, _, px) = read_pgm(&path);
    assert!(px.iter().all(|&p| p == 0 || p == 128));
    assert!(px.contains(&0) && px.contains(&128));
}

#[test]
fn spiral_mask_winds_twice() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spiral.pgm");
    ok(&["holo", "--kind", "spiral", "--l", "2", "--size", "101x101", "--out", s(&path)]);
    let (w, _, px) = read_pgm(&path);
    let phase = |col: usize, row: usize| px[row * w + col] as f64 / 256.0 * std::f64::consts::TAU;
    let samples: Vec<f64> = (0..720)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 720.0;
            let col = (50.5 + 40.0 * t.cos()).floor() as usize;
            let row = (50.5 - 40.0 * t.sin()).floor() as usize;
            phase(col, row)
        })
        .collect();
    let mut total = 0.0;
    for k in 0..samples.len() {
        let mut d = samples[(k + 1) % samples.len()] - samples[k];
        d -= std::f64::consts::TAU * (d / std::f64::consts::TAU).round();
        total += d;
    }
    assert_eq!((total / std::f64::consts::TAU).round() as i32, 2);
}

#[test]
fn holo_writes_png_from_extension() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blazed.png");
    ok(&["holo", "--kind", "blazed", "--size", "32x16", "--out", s(&path)]);
    assert!(std::fs::read(&path).unwrap().starts_with(b"\x89PNG"));
}

#[test]
fn holo_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.pgm");
    assert_eq!(run(&["holo", "--kind", "vortex", "--out", s(&path)]).status.code(), Some(2));
    assert_eq!(run(&["holo", "--kind", "lh", "--size", "12", "--out", s(&path)]).status.code(), Some(2));
    let missing = dir.path().join("no/such/dir/x.pgm");
    assert_eq!(run(&["holo", "--kind", "lh", "--size", "8x8", "--out", s(&missing)]).status.code(), Some(4));
}
