//! The five computing subcommands: flag resolution, the call into the
//! library, and manifest-accompanied file output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use mesofringe::constants::HBAR;
use mesofringe::{
    action_exchange_check, build_comparison, emission_rate_density, estimate_f, estimate_pattern,
    far_field_check, fringe_pattern, tdec_surface_at_level, total_rate_series,
    visibility_closed_form, visibility_surface, write_trajectories, AxisKind, EmissionSpectrum,
    ExperimentConfig, GridSpec, KickLaw, McConfig, MoleculeParams, RandomStream, Surface,
    VisibilityResult,
};

use crate::config::{resolve_str, resolve_typed, ConfigMap};
use crate::manifest::RunManifest;
use crate::units::{linspace, parse_axis, parse_length, parse_point, parse_range, parse_temperature, parse_time};
use crate::{
    with_threads, CliError, IntensityArgs, McVerifyArgs, MoleculeArgs, SpectrumArgs, SurfaceArgs,
    VisibilityArgs,
};

const DEFAULT_TOL: f64 = 1e-10;

fn load_config(path: &Option<PathBuf>) -> Result<ConfigMap, CliError> {
    match path {
        Some(p) => ConfigMap::load(p),
        None => Ok(ConfigMap::default()),
    }
}

/// Resolve the molecule from a preset name or explicit parameters.
fn resolve_molecule(args: &MoleculeArgs, config: &ConfigMap) -> Result<MoleculeParams, CliError> {
    let preset = args
        .molecule
        .clone()
        .or_else(|| config.get("molecule").map(String::from));
    if let Some(name) = preset {
        return MoleculeParams::preset(&name)
            .ok_or_else(|| CliError::usage(format!("unknown molecule preset `{name}`")));
    }
    let parse_f64 = |s: &str| s.parse::<f64>().map_err(|e| e.to_string());
    let parse_u32 = |s: &str| s.parse::<u32>().map_err(|e| e.to_string());
    let n_modes = resolve_typed(args.n_modes, config, "n-modes", parse_f64, None)?;
    let ell = resolve_typed(args.ell, config, "ell", parse_u32, None)?;
    let a_ell = resolve_typed(args.a_ell, config, "a-ell", parse_f64, None)?;
    let mass = resolve_typed(args.mass, config, "mass", parse_f64, None)?;
    let name = args
        .mol_name
        .clone()
        .or_else(|| config.get("mol-name").map(String::from))
        .unwrap_or_else(|| "custom".to_string());
    Ok(MoleculeParams::new(&name, n_modes, ell, a_ell, mass)?)
}

/// Canonical argv fragment reproducing the molecule with explicit values,
/// independent of any preset table.
fn molecule_argv(mol: &MoleculeParams) -> Vec<String> {
    vec![
        "--mol-name".into(),
        mol.name.clone(),
        "--n-modes".into(),
        format!("{}", mol.n_modes),
        "--ell".into(),
        format!("{}", mol.ell),
        "--a-ell".into(),
        format!("{}", mol.a_ell),
        "--mass".into(),
        format!("{}", mol.mass),
    ]
}

fn molecule_params_json(mol: &MoleculeParams) -> Value {
    json!({
        "name": mol.name,
        "n_modes": mol.n_modes,
        "ell": mol.ell,
        "a_ell": mol.a_ell,
        "mass": mol.mass,
    })
}

fn write_output(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

// ---------------------------------------------------------------- visibility

pub fn run_visibility(args: VisibilityArgs) -> Result<(), CliError> {
    let config = load_config(&args.common.config)?;
    let mol = resolve_molecule(&args.molecule, &config)?;
    let temperature = resolve_str(&args.temperature, &config, "T", parse_temperature, None)?;
    let d = resolve_str(&args.separation, &config, "d", parse_length, None)?;
    let t = resolve_str(&args.time, &config, "t", parse_time, None)?;
    let slit_width = resolve_str(
        &args.slit_width,
        &config,
        "slit-width",
        parse_length,
        Some(ExperimentConfig::DEFAULT_SLIT_WIDTH),
    )?;
    let tol = resolve_typed(
        args.tol,
        &config,
        "tol",
        |s| s.parse().map_err(|e: std::num::ParseFloatError| e.to_string()),
        Some(DEFAULT_TOL),
    )?;

    let cfg = ExperimentConfig::new(mol.clone(), temperature, d, t)?
        .with_slit_momentum_width(HBAR / (2.0 * slit_width))?;
    let vis = with_threads(args.common.threads, || visibility_closed_form(&cfg, tol))??;
    let far_field = far_field_check(&cfg);
    let action = action_exchange_check(&cfg)?;

    println!(
        "V={} phase={} lambda={} G={} zeta={} far_field_ratio={} action_ratio={} thermal_ratio={}",
        fmt(vis.visibility),
        fmt(vis.phase),
        fmt(vis.lambda),
        fmt(vis.g_factor),
        fmt(vis.zeta),
        fmt(far_field),
        fmt(action.action_ratio),
        fmt(action.thermal_ratio),
    );

    if let Some(out) = &args.json {
        let record = json!({
            "molecule": molecule_params_json(&mol),
            "temperature": temperature,
            "slit_separation": d,
            "flight_time": t,
            "slit_width": slit_width,
            "visibility": vis.visibility,
            "phase": vis.phase,
            "lambda": vis.lambda,
            "g_factor": vis.g_factor,
            "zeta": vis.zeta,
            "far_field_ratio": far_field,
            "action_ratio": action.action_ratio,
            "dp_total": action.dp_total,
            "thermal_ratio": action.thermal_ratio,
        });
        write_output(out, &(serde_json::to_string_pretty(&record).unwrap() + "\n"))?;

        let mut argv = vec!["visibility".to_string()];
        argv.extend(molecule_argv(&mol));
        argv.extend([
            "--T".into(), format!("{temperature}"),
            "--d".into(), format!("{d}"),
            "--t".into(), format!("{t}"),
            "--slit-width".into(), format!("{slit_width}"),
            "--tol".into(), format!("{tol}"),
            "--json".into(), out.display().to_string(),
        ]);
        let params = record.as_object().cloned().unwrap_or_default();
        RunManifest::new("visibility", None, argv, params).write_beside(out)?;
    }
    Ok(())
}

// ------------------------------------------------------------------- surface

pub fn run_surface(args: SurfaceArgs) -> Result<(), CliError> {
    let config = load_config(&args.common.config)?;
    let mol = resolve_molecule(&args.molecule, &config)?;
    let quantity = resolve_str(&args.quantity, &config, "quantity", |s| Ok(s.to_string()), None)?;
    let out = resolve_typed(args.out.clone(), &config, "out", |s| Ok(PathBuf::from(s)), None)?;
    let tol = resolve_typed(
        args.tol,
        &config,
        "tol",
        |s| s.parse().map_err(|e: std::num::ParseFloatError| e.to_string()),
        Some(1e-9),
    )?;

    let mut grid_specs = args.grids.clone();
    if grid_specs.is_empty() {
        if let Some(raw) = config.get("grid") {
            grid_specs = raw.split_whitespace().map(String::from).collect();
        }
    }
    if grid_specs.len() != 2 {
        return Err(CliError::usage(format!(
            "need exactly two --grid axes, got {}",
            grid_specs.len()
        )));
    }
    let axis1 = parse_axis(&grid_specs[0]).map_err(CliError::usage)?;
    let axis2 = parse_axis(&grid_specs[1]).map_err(CliError::usage)?;
    let swept = [axis1.kind, axis2.kind];

    // Fixed values for whatever the grid does not sweep; swept axes get a
    // placeholder that is replaced per node. For tdec the temperature is
    // the solved quantity, never an input.
    let temperature = if swept.contains(&AxisKind::Temperature) || quantity == "tdec" {
        300.0
    } else {
        resolve_str(&args.temperature, &config, "T", parse_temperature, None)?
    };
    let d = if swept.contains(&AxisKind::SlitSeparation) {
        1e-6
    } else {
        resolve_str(&args.separation, &config, "d", parse_length, None)?
    };
    let t = if swept.contains(&AxisKind::FlightTime) {
        1e-2
    } else {
        resolve_str(&args.time, &config, "t", parse_time, None)?
    };

    let base = ExperimentConfig::new(mol.clone(), temperature, d, t)?;
    let grid = GridSpec { axis1, axis2, base };

    let threshold = resolve_typed(
        args.threshold,
        &config,
        "threshold",
        |s| s.parse().map_err(|e: std::num::ParseFloatError| e.to_string()),
        Some(0.5),
    )?;
    let bracket_raw = resolve_str(
        &args.bracket,
        &config,
        "bracket",
        |s| Ok(s.to_string()),
        Some("10:5000".to_string()),
    )?;
    let bracket = {
        let parts: Vec<&str> = bracket_raw.split(':').collect();
        if parts.len() != 2 {
            return Err(CliError::usage("--bracket must be lo:hi in K"));
        }
        let lo: f64 = parts[0].parse().map_err(|_| CliError::usage("bad bracket lo"))?;
        let hi: f64 = parts[1].parse().map_err(|_| CliError::usage("bad bracket hi"))?;
        (lo, hi)
    };
    let tol_t = resolve_typed(
        args.tol_t,
        &config,
        "tol-t",
        |s| s.parse().map_err(|e: std::num::ParseFloatError| e.to_string()),
        Some(0.01),
    )?;

    let surface: Surface = match quantity.as_str() {
        "visibility" => with_threads(args.common.threads, || visibility_surface(&grid, tol))??,
        "tdec" => with_threads(args.common.threads, || {
            tdec_surface_at_level(&grid, bracket, tol_t, tol, threshold)
        })??,
        other => {
            return Err(CliError::usage(format!(
                "unknown quantity `{other}` (visibility or tdec)"
            )))
        }
    };

    if surface.failed_nodes > 0 && !args.allow_partial {
        return Err(CliError::numeric(format!(
            "{} grid nodes failed; re-run with --allow-partial to keep nan cells",
            surface.failed_nodes
        )));
    }

    let v1 = surface.axis1.values();
    let v2 = surface.axis2.values();
    let mut csv = String::from("axis1,axis2,value\n");
    for (i, a) in v1.iter().enumerate() {
        for (j, b) in v2.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{}", fmt(*a), fmt(*b), fmt(surface.value(i, j)));
        }
    }
    write_output(&out, &csv)?;

    let mut argv = vec!["surface".to_string(), "--quantity".into(), quantity.clone()];
    argv.extend(molecule_argv(&mol));
    for spec in &grid_specs {
        argv.extend(["--grid".into(), spec.clone()]);
    }
    if !swept.contains(&AxisKind::Temperature) && quantity != "tdec" {
        argv.extend(["--T".into(), format!("{temperature}")]);
    }
    if !swept.contains(&AxisKind::SlitSeparation) {
        argv.extend(["--d".into(), format!("{d}")]);
    }
    if !swept.contains(&AxisKind::FlightTime) {
        argv.extend(["--t".into(), format!("{t}")]);
    }
    if quantity == "tdec" {
        argv.extend([
            "--threshold".into(), format!("{threshold}"),
            "--bracket".into(), format!("{}:{}", bracket.0, bracket.1),
            "--tol-t".into(), format!("{tol_t}"),
        ]);
    }
    argv.extend(["--tol".into(), format!("{tol}")]);
    if args.allow_partial {
        argv.push("--allow-partial".into());
    }
    argv.extend(["--out".into(), out.display().to_string()]);

    let mut params = Map::new();
    params.insert("quantity".into(), json!(quantity));
    params.insert("molecule".into(), molecule_params_json(&mol));
    params.insert("axis1".into(), json!({
        "name": surface.axis1.kind.name(), "min": surface.axis1.min,
        "max": surface.axis1.max, "count": surface.axis1.count, "log": surface.axis1.log,
    }));
    params.insert("axis2".into(), json!({
        "name": surface.axis2.kind.name(), "min": surface.axis2.min,
        "max": surface.axis2.max, "count": surface.axis2.count, "log": surface.axis2.log,
    }));
    params.insert("fixed".into(), json!({"T": temperature, "d": d, "t": t}));
    if quantity == "tdec" {
        params.insert("threshold".into(), json!(threshold));
        params.insert("bracket".into(), json!([bracket.0, bracket.1]));
        params.insert("tol_t".into(), json!(tol_t));
    }
    params.insert("tol".into(), json!(tol));
    params.insert("failed_nodes".into(), json!(surface.failed_nodes));
    RunManifest::new("surface", None, argv, params).write_beside(&out)?;

    println!(
        "{} surface: {}x{} nodes -> {} ({} failed)",
        quantity,
        surface.axis1.count,
        surface.axis2.count,
        out.display(),
        surface.failed_nodes
    );
    Ok(())
}

// ----------------------------------------------------------------- mc-verify

/// Default comparison grid: 3 temperatures x 2 separations x 2 flight
/// times, spanning the quantum-to-classical transition.
fn default_points() -> Vec<(f64, f64, f64)> {
    let mut points = Vec::new();
    for &temperature in &[1500.0, 2000.0, 2500.0] {
        for &d in &[0.2e-6, 1e-6] {
            for &t in &[2e-3, 5e-3] {
                points.push((temperature, d, t));
            }
        }
    }
    points
}

pub fn run_mc_verify(args: McVerifyArgs) -> Result<(), CliError> {
    let config = load_config(&args.common.config)?;
    let mol = resolve_molecule(&args.molecule, &config)?;
    let parse_u64 = |s: &str| s.parse::<u64>().map_err(|e| e.to_string());
    let n = resolve_typed(args.n, &config, "n", parse_u64, Some(100_000))?;
    let seed = resolve_typed(args.seed, &config, "seed", parse_u64, Some(1))?;
    let batch_size = resolve_typed(args.batch_size, &config, "batch-size", parse_u64, Some(4096))?;
    if n < 1000 {
        return Err(CliError::usage(format!(
            "--n {n} is below the statistical floor of 1000 samples"
        )));
    }
    let points: Vec<(f64, f64, f64)> = if args.points.is_empty() {
        default_points()
    } else {
        args.points
            .iter()
            .map(|p| parse_point(p).map_err(CliError::usage))
            .collect::<Result<_, _>>()?
    };

    let mc = McConfig {
        n_samples: n,
        seed,
        batch_size: batch_size.min(n),
    };

    let rows: Vec<(f64, f64, f64, mesofringe::Comparison, f64)> =
        with_threads(args.common.threads, || -> Result<_, CliError> {
            let mut rows = Vec::new();
            for &(temperature, d, t) in &points {
                let cfg = ExperimentConfig::new(mol.clone(), temperature, d, t)?;
                let exact = visibility_closed_form(&cfg, DEFAULT_TOL)?;
                let est = estimate_f(&cfg, &mc)?;
                let cmp = build_comparison(&est, &exact);
                rows.push((temperature, d, t, cmp, est.f_imag / est.std_error_imag.max(1e-300)));
            }
            Ok(rows)
        })??;

    println!("{:>9} {:>10} {:>9} {:>13} {:>13} {:>11} {:>8}", "T_K", "d_m", "t_s", "v_mc", "v_exact", "std_error", "pull");
    let mut worst: f64 = 0.0;
    for (temperature, d, t, cmp, _) in &rows {
        println!(
            "{:>9} {:>10} {:>9} {:>13.6e} {:>13.6e} {:>11.3e} {:>8.2}",
            temperature, d, t, cmp.v_mc, cmp.v_exact, cmp.std_error, cmp.pull
        );
        worst = worst.max(cmp.pull.abs());
    }
    println!("max |pull| = {worst:.2} over {} points, n = {n}, seed = {seed}", rows.len());

    let dump_count = args.dump_count.unwrap_or(10);
    if let Some(dump) = &args.dump {
        let (temperature, _, t) = points[0];
        let spec = EmissionSpectrum::new(mol.clone(), temperature, DEFAULT_TOL)?;
        let law = KickLaw::new(spec)?;
        let mut stream = RandomStream::from_seed(seed);
        let mut buf = Vec::new();
        write_trajectories(&mut buf, &law, t, dump_count, &mut stream)
            .map_err(|e| CliError::io(e.to_string()))?;
        write_output(dump, &String::from_utf8(buf).expect("ascii dump"))?;
    }

    if let Some(out) = &args.json {
        let records: Vec<Value> = rows
            .iter()
            .map(|(temperature, d, t, cmp, imag_pull)| {
                json!({
                    "T": temperature, "d": d, "t": t,
                    "v_mc": cmp.v_mc, "v_exact": cmp.v_exact,
                    "std_error": cmp.std_error, "pull": cmp.pull,
                    "imag_pull": imag_pull, "flagged": cmp.flagged,
                })
            })
            .collect();
        let doc = json!({
            "molecule": molecule_params_json(&mol),
            "n_samples": n,
            "seed": seed,
            "batch_size": mc.batch_size,
            "points": records,
            "max_abs_pull": worst,
            "all_within_4": worst <= 4.0,
        });
        write_output(out, &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))?;

        let mut argv = vec!["mc-verify".to_string()];
        argv.extend(molecule_argv(&mol));
        argv.extend([
            "--n".into(), format!("{n}"),
            "--seed".into(), format!("{seed}"),
            "--batch-size".into(), format!("{}", mc.batch_size),
        ]);
        for &(temperature, d, t) in &points {
            argv.extend(["--point".into(), format!("{temperature},{d},{t}")]);
        }
        argv.extend(["--json".into(), out.display().to_string()]);
        if let Some(dump) = &args.dump {
            argv.extend([
                "--dump".into(), dump.display().to_string(),
                "--dump-count".into(), format!("{dump_count}"),
            ]);
        }
        let params = doc.as_object().cloned().unwrap_or_default();
        let manifest = RunManifest::new("mc-verify", Some(seed), argv, params);
        manifest.write_beside(out)?;
        if let Some(dump) = &args.dump {
            manifest.write_beside(dump)?;
        }
    }

    if worst > 4.0 {
        return Err(CliError::verification(format!(
            "Monte Carlo disagrees with the closed form: max |pull| = {worst:.2} > 4"
        )));
    }
    Ok(())
}

// ------------------------------------------------------------------ spectrum

pub fn run_spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let config = load_config(&args.common.config)?;
    let mol = resolve_molecule(&args.molecule, &config)?;
    let temperature = resolve_str(&args.temperature, &config, "T", parse_temperature, None)?;
    let omega_raw = resolve_str(
        &args.omega,
        &config,
        "omega",
        |s| Ok(s.to_string()),
        Some("1e13:2e15:200".to_string()),
    )?;
    let out = resolve_typed(args.out, &config, "out", |s| Ok(PathBuf::from(s)), None)?;

    let (omega_grid, log_spaced) = {
        let (spec, log) = match omega_raw.strip_suffix(":log") {
            Some(stripped) => (stripped, true),
            None => (omega_raw.as_str(), false),
        };
        let (min, max, count) = parse_range(spec).map_err(CliError::usage)?;
        let grid = if log {
            if min <= 0.0 {
                return Err(CliError::usage("log omega grid needs min > 0"));
            }
            (0..count)
                .map(|i| {
                    (min.ln() + (max.ln() - min.ln()) * i as f64 / (count - 1) as f64).exp()
                })
                .collect::<Vec<f64>>()
        } else {
            linspace(min, max, count)
        };
        (grid, log)
    };

    let spectrum = EmissionSpectrum::new(mol.clone(), temperature, DEFAULT_TOL)?;
    let lambda_quad = spectrum.total_rate;
    let series = total_rate_series(&mol, temperature)?;
    let rel_diff = ((series.rate - lambda_quad) / lambda_quad).abs();

    let mut csv = String::from("omega,rate_density\n");
    for &omega in &omega_grid {
        let _ = writeln!(csv, "{},{}", fmt(omega), fmt(emission_rate_density(&spectrum, omega)));
    }
    write_output(&out, &csv)?;

    println!("lambda_quadrature = {}", fmt(lambda_quad));
    println!("lambda_series = {}", fmt(series.rate));
    println!("relative_difference = {}", fmt(rel_diff));
    println!("photons_in_2ms = {}", fmt(lambda_quad * 2e-3));
    println!(
        "series_terms_used = {} (last term {:.3e})",
        series.report.last_index + 1,
        series.report.last_term
    );

    let mut argv = vec!["spectrum".to_string()];
    argv.extend(molecule_argv(&mol));
    argv.extend([
        "--T".into(), format!("{temperature}"),
        "--omega".into(), omega_raw.clone(),
        "--out".into(), out.display().to_string(),
    ]);
    let params = manifest_params_spectrum(&mol, temperature, &omega_raw, log_spaced, lambda_quad, series.rate, rel_diff);
    RunManifest::new("spectrum", None, argv, params).write_beside(&out)?;
    Ok(())
}

fn manifest_params_spectrum(
    mol: &MoleculeParams,
    temperature: f64,
    omega_raw: &str,
    log: bool,
    lambda_quad: f64,
    lambda_series: f64,
    rel_diff: f64,
) -> Map<String, Value> {
    let mut params = Map::new();
    params.insert("molecule".into(), molecule_params_json(mol));
    params.insert("temperature".into(), json!(temperature));
    params.insert("omega_grid".into(), json!(omega_raw));
    params.insert("log".into(), json!(log));
    params.insert("lambda_quadrature".into(), json!(lambda_quad));
    params.insert("lambda_series".into(), json!(lambda_series));
    params.insert("relative_difference".into(), json!(rel_diff));
    params
}

// ----------------------------------------------------------------- intensity

pub fn run_intensity(args: IntensityArgs) -> Result<(), CliError> {
    let config = load_config(&args.common.config)?;
    let mol = resolve_molecule(&args.molecule, &config)?;
    let temperature = resolve_str(&args.temperature, &config, "T", parse_temperature, None)?;
    let d = resolve_str(&args.separation, &config, "d", parse_length, None)?;
    let t = resolve_str(&args.time, &config, "t", parse_time, None)?;
    let slit_width = resolve_str(
        &args.slit_width,
        &config,
        "slit-width",
        parse_length,
        Some(ExperimentConfig::DEFAULT_SLIT_WIDTH),
    )?;
    let mode = resolve_str(&args.mode, &config, "mode", |s| Ok(s.to_string()), Some("exact".into()))?;
    if !["exact", "mc", "both"].contains(&mode.as_str()) {
        return Err(CliError::usage(format!("unknown mode `{mode}` (exact, mc or both)")));
    }
    let screen_raw = resolve_str(
        &args.screen,
        &config,
        "screen",
        |s| Ok(s.to_string()),
        Some("-15e-6:15e-6:301".to_string()),
    )?;
    let (x_min, x_max, count) = parse_range(&screen_raw).map_err(CliError::usage)?;
    let parse_u64 = |s: &str| s.parse::<u64>().map_err(|e| e.to_string());
    let n = resolve_typed(args.n, &config, "n", parse_u64, Some(20_000))?;
    let seed = resolve_typed(args.seed, &config, "seed", parse_u64, Some(1))?;
    let out = resolve_typed(args.out, &config, "out", |s| Ok(PathBuf::from(s)), None)?;

    if t <= 0.0 {
        return Err(CliError::usage("intensity needs a positive flight time"));
    }
    let cfg = ExperimentConfig::new(mol.clone(), temperature, d, t)?
        .with_slit_momentum_width(HBAR / (2.0 * slit_width))?;
    let grid = linspace(x_min, x_max, count);

    let vis: VisibilityResult = visibility_closed_form(&cfg, DEFAULT_TOL)?;
    let exact = fringe_pattern(&cfg, &vis, &grid);

    let mc_result = if mode != "exact" {
        let mc = McConfig {
            n_samples: n,
            seed,
            batch_size: n.clamp(1, 4096),
        };
        Some(with_threads(args.common.threads, || {
            estimate_pattern(&cfg, &mc, &grid)
        })??)
    } else {
        None
    };

    let mut csv = String::new();
    match &mc_result {
        None => {
            csv.push_str("x,I_exact,I0\n");
            for (i, &x) in grid.iter().enumerate() {
                let _ = writeln!(csv, "{},{},{}", fmt(x), fmt(exact.intensity[i]), fmt(exact.envelope[i]));
            }
        }
        Some(emp) => {
            csv.push_str("x,I_exact,I0,I_mc,I_mc_se\n");
            for (i, &x) in grid.iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    fmt(x),
                    fmt(exact.intensity[i]),
                    fmt(exact.envelope[i]),
                    fmt(emp.pattern.intensity[i]),
                    fmt(emp.std_error[i])
                );
            }
        }
    }
    write_output(&out, &csv)?;
    println!(
        "intensity: {} points, V = {}, fringe spacing = {} m -> {}",
        grid.len(),
        fmt(vis.visibility),
        fmt(mesofringe::fringe_spacing(&cfg)),
        out.display()
    );

    let mut argv = vec!["intensity".to_string()];
    argv.extend(molecule_argv(&mol));
    argv.extend([
        "--T".into(), format!("{temperature}"),
        "--d".into(), format!("{d}"),
        "--t".into(), format!("{t}"),
        "--slit-width".into(), format!("{slit_width}"),
        "--mode".into(), mode.clone(),
        "--screen".into(), screen_raw.clone(),
        "--n".into(), format!("{n}"),
        "--seed".into(), format!("{seed}"),
        "--out".into(), out.display().to_string(),
    ]);
    let mut params = Map::new();
    params.insert("molecule".into(), molecule_params_json(&mol));
    params.insert("temperature".into(), json!(temperature));
    params.insert("slit_separation".into(), json!(d));
    params.insert("flight_time".into(), json!(t));
    params.insert("slit_width".into(), json!(slit_width));
    params.insert("mode".into(), json!(mode));
    params.insert("screen".into(), json!(screen_raw));
    params.insert("n_samples".into(), json!(n));
    params.insert("seed".into(), json!(seed));
    params.insert("visibility".into(), json!(vis.visibility));
    let seed_opt = if mode == "exact" { None } else { Some(seed) };
    RunManifest::new("intensity", seed_opt, argv, params).write_beside(&out)?;
    Ok(())
}
