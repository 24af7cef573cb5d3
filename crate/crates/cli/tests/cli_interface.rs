//! Exercises the CLI surface: exit codes, CSV shapes, config merging,
//! manifests and replay.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mesofringe")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mesofringe-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout_field(out: &Output, key: &str) -> f64 {
    // Handles both `key=value` report lines and `key = value` summaries.
    let text = String::from_utf8_lossy(&out.stdout).replace(" = ", "=");
    for token in text.split_whitespace() {
        if let Some(value) = token.strip_prefix(&format!("{key}=")) {
            return value.parse().unwrap();
        }
    }
    panic!("field {key} not found in: {text}");
}

#[test]
fn visibility_reports_deep_classical_value() {
    let out = run(&["visibility", "--molecule", "C70", "--T", "2500", "--d", "1e-6", "--t", "10e-3"]);
    assert!(out.status.success());
    let v = stdout_field(&out, "V");
    assert!(v < 1e-3, "V = {v}");
    let lambda = stdout_field(&out, "lambda");
    assert!(lambda > stdout_field(&out, "G"));
}

#[test]
fn visibility_at_zero_flight_time_is_one() {
    let out = run(&["visibility", "--molecule", "C70", "--T", "2500K", "--d", "1um", "--t", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout_field(&out, "V"), 1.0);
}

#[test]
fn missing_flag_is_a_usage_error() {
    let out = run(&["visibility", "--molecule", "C70", "--T", "2500"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn unknown_flag_exits_2_with_usage() {
    let out = run(&["visibility", "--nonsense", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.to_lowercase().contains("usage") || err.contains("--help"), "{err}");
}

#[test]
fn surface_smoke_grid_parses() {
    let out_path = tmp("smoke.csv");
    let out = run(&[
        "surface", "--quantity", "visibility", "--molecule", "C60",
        "--d", "1e-6",
        "--grid", "T:500:2500:2", "--grid", "t:1e-3:5e-3:2",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "axis1,axis2,value");
    assert_eq!(lines.len(), 5);
    for line in &lines[1..] {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 3);
        assert!((0.0..=1.0).contains(&fields[2]));
    }
    // Sibling manifest exists and replays to identical bytes.
    let manifest = tmp("smoke.csv.manifest.json");
    assert!(manifest.exists());
    let before = std::fs::read(&out_path).unwrap();
    let replay = run(&["replay", manifest.to_str().unwrap()]);
    assert!(replay.status.success());
    assert_eq!(before, std::fs::read(&out_path).unwrap());
}

#[test]
fn config_file_merges_under_flags() {
    let cfg_path = tmp("merge.cfg");
    std::fs::write(&cfg_path, "molecule = C70\nT = 1000\nd = 1um\nt = 5ms\n").unwrap();
    // Flag overrides the config temperature; the rest comes from the file.
    let out = run(&[
        "visibility", "--config", cfg_path.to_str().unwrap(), "--T", "2500",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let hot = stdout_field(&out, "V");
    let cfg_only = run(&["visibility", "--config", cfg_path.to_str().unwrap()]);
    let warm = stdout_field(&cfg_only, "V");
    assert!(hot < warm, "override should decohere more: {hot} vs {warm}");
}

#[test]
fn mc_verify_rejects_tiny_sample_counts() {
    let out = run(&["mc-verify", "--molecule", "C70", "--n", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mc_verify_same_seed_is_byte_identical() {
    let a = tmp("mc-a.json");
    let b = tmp("mc-b.json");
    for (path, _) in [(&a, 0), (&b, 1)] {
        let out = run(&[
            "mc-verify", "--molecule", "C70", "--n", "2000", "--seed", "99",
            "--point", "2000,1e-6,2e-3",
            "--json", path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn mc_verify_dumps_trajectories_on_request() {
    let dump = tmp("traj.txt");
    let out = run(&[
        "mc-verify", "--molecule", "C70", "--n", "1000", "--seed", "5",
        "--point", "2500,1e-6,5e-3",
        "--dump", dump.to_str().unwrap(), "--dump-count", "7",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(text.lines().count(), 7);
    for line in text.lines() {
        let fields: Vec<&str> = line.split(' ').collect();
        let n: usize = fields[0].parse().unwrap();
        assert_eq!(fields.len(), 1 + 2 * n);
        // times ascending, interleaved with jumps
        let times: Vec<f64> = fields[1..].iter().step_by(2).map(|f| f.parse().unwrap()).collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn spectrum_reports_both_routes() {
    let out_path = tmp("spec.csv");
    let out = run(&[
        "spectrum", "--molecule", "C70", "--T", "2500K",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let photons = stdout_field(&out, "photons_in_2ms");
    assert!((3.5..=5.5).contains(&photons), "photons = {photons}");
    let rel = stdout_field(&out, "relative_difference");
    assert!(rel < 1e-6);

    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("omega,rate_density\n"));
    for line in text.lines().skip(1) {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert!(fields[1] >= 0.0);
    }
}

#[test]
fn spectrum_cold_limit_underflows_gracefully() {
    let out_path = tmp("cold.csv");
    let out = run(&[
        "spectrum", "--molecule", "C70", "--T", "1",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let lambda = stdout_field(&out, "lambda_quadrature");
    assert!((0.0..1e-12).contains(&lambda), "Λ(1 K) = {lambda}");
}

#[test]
fn intensity_cold_molecule_exact_matches_mc() {
    let out_path = tmp("intensity.csv");
    let out = run(&[
        "intensity", "--molecule", "C70", "--T", "10", "--d", "1um", "--t", "10ms",
        "--mode", "both", "--n", "2000", "--seed", "3",
        "--screen", "-10e-6:10e-6:101",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,I_exact,I0,I_mc,I_mc_se");
    let mut peak = 0.0_f64;
    let mut rows = Vec::new();
    for line in &lines[1..] {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(f[1] >= 0.0 && f[2] >= 0.0 && f[3] >= 0.0);
        peak = peak.max(f[1]);
        rows.push(f);
    }
    // Kick-free: the Monte Carlo column reproduces the exact one.
    for f in &rows {
        assert!(
            (f[3] - f[1]).abs() <= 3.0 * f[4] + 1e-9 * peak,
            "x = {}: exact {} vs mc {}",
            f[0],
            f[1],
            f[3]
        );
    }
    // Fringe spacing from peak detection on the envelope-normalized
    // exact column: 2πħt/(md) ≈ 4.75 μm for C70 at d = 1 μm, t = 10 ms.
    let ratio: Vec<f64> = rows.iter().map(|f| f[1] / f[2].max(1e-300)).collect();
    let mut peaks = Vec::new();
    for i in 1..ratio.len() - 1 {
        if ratio[i] > ratio[i - 1] && ratio[i] > ratio[i + 1] {
            peaks.push(rows[i][0]);
        }
    }
    assert!(peaks.len() >= 3);
    for w in peaks.windows(2) {
        assert!(((w[1] - w[0]) / 4.750372e-6 - 1.0).abs() < 0.05);
    }
}

#[test]
fn intensity_rejects_unknown_mode() {
    let out = run(&[
        "intensity", "--molecule", "C70", "--T", "10", "--d", "1um", "--t", "10ms",
        "--mode", "magic", "--out", "/tmp/never.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn explicit_molecule_parameters_work() {
    // C70 passed explicitly must reproduce the preset exactly.
    let preset = run(&["visibility", "--molecule", "C70", "--T", "2000", "--d", "1e-6", "--t", "5e-3"]);
    let explicit = run(&[
        "visibility", "--mol-name", "C70", "--n-modes", "200", "--ell", "4",
        "--a-ell", "7.79e-84", "--mass", "1.394852815944e-24",
        "--T", "2000", "--d", "1e-6", "--t", "5e-3",
    ]);
    assert!(explicit.status.success());
    let (vp, ve) = (stdout_field(&preset, "V"), stdout_field(&explicit, "V"));
    assert!((vp - ve).abs() < 1e-12 * vp.max(1e-300), "{vp} vs {ve}");
}
