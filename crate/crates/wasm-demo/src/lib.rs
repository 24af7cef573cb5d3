//! Browser demo bindings: visibility curves, fringe patterns and the
//! decoherence temperature, exposed to a static page through
//! wasm-bindgen. See `www/index.html`.

use wasm_bindgen::prelude::*;

use mesofringe::{
    decoherence_temperature, fringe_pattern, visibility_closed_form, ExperimentConfig,
    MoleculeParams, TdecOutcome,
};

const TOL: f64 = 1e-8;

fn molecule(name: &str) -> Result<MoleculeParams, JsValue> {
    MoleculeParams::preset(name)
        .ok_or_else(|| JsValue::from_str(&format!("unknown molecule `{name}` (C60 or C70)")))
}

fn err(e: mesofringe::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Visibility V(T) on a uniform temperature grid [0, t_max_kelvin] for a
/// fixed slit separation (m) and flight time (s).
#[wasm_bindgen]
pub fn visibility_curve(
    molecule_name: &str,
    d: f64,
    t: f64,
    t_max_kelvin: f64,
    points: usize,
) -> Result<Vec<f64>, JsValue> {
    let mol = molecule(molecule_name)?;
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let temperature = t_max_kelvin * i as f64 / (points - 1) as f64;
        if temperature == 0.0 {
            out.push(1.0);
            continue;
        }
        let cfg = ExperimentConfig::new(mol.clone(), temperature, d, t).map_err(err)?;
        out.push(visibility_closed_form(&cfg, TOL).map_err(err)?.visibility);
    }
    Ok(out)
}

/// Screen pattern on [-half_width, half_width]: the first `points`
/// entries are I(x), the next `points` the envelope I0(x).
#[wasm_bindgen]
pub fn fringe_curve(
    molecule_name: &str,
    temperature: f64,
    d: f64,
    t: f64,
    half_width: f64,
    points: usize,
) -> Result<Vec<f64>, JsValue> {
    let mol = molecule(molecule_name)?;
    let cfg = ExperimentConfig::new(mol, temperature, d, t).map_err(err)?;
    let vis = visibility_closed_form(&cfg, TOL).map_err(err)?;
    let grid: Vec<f64> = (0..points)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / (points - 1) as f64)
        .collect();
    let pattern = fringe_pattern(&cfg, &vis, &grid);
    let mut out = pattern.intensity;
    out.extend(pattern.envelope);
    Ok(out)
}

/// Temperature at which V drops to 1/2, or NaN when the visibility never
/// crosses 1/2 below 5000 K.
#[wasm_bindgen]
pub fn decoherence_temperature_kelvin(
    molecule_name: &str,
    d: f64,
    t: f64,
) -> Result<f64, JsValue> {
    let mol = molecule(molecule_name)?;
    match decoherence_temperature(&mol, d, t, (10.0, 5000.0), 0.05, TOL).map_err(err)? {
        TdecOutcome::Root { temperature, .. } => Ok(temperature),
        TdecOutcome::NoRoot { .. } => Ok(f64::NAN),
    }
}
