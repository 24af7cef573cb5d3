//! The V = 1/2 level curve and parameter-sweep surfaces.
//!
//! h(T) = [Λ(T) - G(T,d)]·t - ln 2 crosses zero at the decoherence
//! temperature. Λ - G being monotone increasing in T is an assumption
//! (true on every parameter set we have scanned, not a theorem), so
//! every solve validates the bracket on an 8-point grid before bisecting.

use std::collections::HashMap;

use serde::Serialize;

use crate::par_map;
use crate::spectrum::{total_rate_quadrature, MoleculeParams};
use crate::visibility::{attenuation_deficit, visibility_with_rate, ExperimentConfig};
use crate::{Error, Result};

/// Which experiment parameter an axis sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AxisKind {
    Temperature,
    SlitSeparation,
    FlightTime,
}

impl AxisKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "T" => Some(AxisKind::Temperature),
            "d" => Some(AxisKind::SlitSeparation),
            "t" => Some(AxisKind::FlightTime),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AxisKind::Temperature => "T",
            AxisKind::SlitSeparation => "d",
            AxisKind::FlightTime => "t",
        }
    }
}

/// One swept axis: endpoints, node count, linear or log spacing.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AxisSpec {
    pub kind: AxisKind,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl AxisSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.min < self.max) {
            return Err(Error::InvalidParameter(format!(
                "axis {}: min {} must be below max {}",
                self.kind.name(),
                self.min,
                self.max
            )));
        }
        if self.count < 2 {
            return Err(Error::InvalidParameter(format!(
                "axis {}: need at least 2 nodes",
                self.kind.name()
            )));
        }
        if self.log && self.min <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "axis {}: log spacing needs min > 0",
                self.kind.name()
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if self.log {
                    (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + f * (self.max - self.min)
                }
            })
            .collect()
    }
}

/// A rectangular sweep over two distinct axes; the base configuration
/// supplies every parameter not being swept.
#[derive(Clone, Debug, Serialize)]
pub struct GridSpec {
    pub axis1: AxisSpec,
    pub axis2: AxisSpec,
    pub base: ExperimentConfig,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        self.axis2.validate()?;
        if self.axis1.kind == self.axis2.kind {
            return Err(Error::InvalidParameter(
                "grid axes must sweep distinct parameters".into(),
            ));
        }
        Ok(())
    }

    fn config_at(&self, v1: f64, v2: f64) -> ExperimentConfig {
        let mut cfg = self.base.clone();
        for (axis, value) in [(self.axis1.kind, v1), (self.axis2.kind, v2)] {
            match axis {
                AxisKind::Temperature => cfg.temperature = value,
                AxisKind::SlitSeparation => cfg.slit_separation = value,
                AxisKind::FlightTime => cfg.flight_time = value,
            }
        }
        cfg
    }
}

/// A scalar over the grid, axis1-major; failed nodes carry NaN.
#[derive(Clone, Debug, Serialize)]
pub struct Surface {
    pub axis1: AxisSpec,
    pub axis2: AxisSpec,
    pub values: Vec<f64>,
    /// Nodes whose evaluation errored (distinct from no-root NaN nodes).
    pub failed_nodes: usize,
}

impl Surface {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis2.count + j]
    }
}

/// Outcome of the level-curve solve: either a bracketed root or the
/// signed evidence that V never crosses 1/2 inside the bracket.
#[derive(Clone, Copy, Debug, Serialize)]
pub enum TdecOutcome {
    Root { temperature: f64, h_at_root: f64 },
    NoRoot { h_lo: f64, h_hi: f64 },
}

impl TdecOutcome {
    pub fn temperature(&self) -> Option<f64> {
        match self {
            TdecOutcome::Root { temperature, .. } => Some(*temperature),
            TdecOutcome::NoRoot { .. } => None,
        }
    }
}

/// Default solve bracket: harmless underflow below 10 K, nothing plotted
/// above 5000 K.
pub const DEFAULT_BRACKET: (f64, f64) = (10.0, 5000.0);
const BISECTION_CAP: usize = 50;

/// Non-decreasing check with a small relative slack for quadrature noise.
fn is_non_decreasing(values: &[f64]) -> bool {
    values
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-9 * w[0].abs().max(1e-300))
}

/// Solve [Λ(T) - G(T,d)]·t = ln 2 for T by bisection inside `bracket`.
pub fn decoherence_temperature(
    mol: &MoleculeParams,
    d: f64,
    t: f64,
    bracket: (f64, f64),
    tol_t: f64,
    quad_tol: f64,
) -> Result<TdecOutcome> {
    decoherence_temperature_at_level(mol, d, t, bracket, tol_t, quad_tol, 0.5)
}

/// As [`decoherence_temperature`] for a general level curve V = `level`.
pub fn decoherence_temperature_at_level(
    mol: &MoleculeParams,
    d: f64,
    t: f64,
    bracket: (f64, f64),
    tol_t: f64,
    quad_tol: f64,
    level: f64,
) -> Result<TdecOutcome> {
    mol.validate()?;
    let (t_lo, t_hi) = bracket;
    if !(t_lo > 0.0 && t_lo < t_hi) {
        return Err(Error::InvalidParameter(format!(
            "bracket [{t_lo}, {t_hi}] K must be positive and increasing"
        )));
    }
    if !(tol_t > 0.0) {
        return Err(Error::InvalidParameter("tol_t must be positive".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "visibility level must lie in (0, 1), got {level}"
        )));
    }
    let target = -level.ln();
    let h = |temp: f64| -> Result<f64> {
        Ok(attenuation_deficit(mol, temp, d, quad_tol)? * t - target)
    };

    // Bracket validation: h sampled on 8 points must be non-decreasing,
    // otherwise the monotonicity assumption behind the bisection is wrong
    // for this parameter set and we refuse to report a root.
    let mut probe = Vec::with_capacity(8);
    for k in 0..8 {
        let temp = t_lo + (t_hi - t_lo) * k as f64 / 7.0;
        probe.push(h(temp)?);
    }
    if !is_non_decreasing(&probe) {
        return Err(Error::BracketNotMonotone { t_lo, t_hi });
    }
    let (h_lo, h_hi) = (probe[0], probe[7]);
    if h_lo > 0.0 || h_hi < 0.0 {
        return Ok(TdecOutcome::NoRoot { h_lo, h_hi });
    }

    let (mut lo, mut hi) = (t_lo, t_hi);
    let (mut f_lo, mut f_hi) = (h_lo, h_hi);
    for _ in 0..BISECTION_CAP {
        if hi - lo <= tol_t {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = h(mid)?;
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    // Return the candidate with the smallest residual, so |h(T_dec)| never
    // exceeds |h| at either end of the final bracket.
    let mid = 0.5 * (lo + hi);
    let f_mid = h(mid)?;
    let mut best = (mid, f_mid);
    for cand in [(lo, f_lo), (hi, f_hi)] {
        if cand.1.abs() < best.1.abs() {
            best = cand;
        }
    }
    Ok(TdecOutcome::Root {
        temperature: best.0,
        h_at_root: best.1,
    })
}

/// Visibility at every grid node. Λ(T) is evaluated once per unique
/// temperature (it does not depend on d or t); T = 0 nodes short-circuit
/// to the exact limit V = 1 instead of integrating at T = 0.
pub fn visibility_surface(grid: &GridSpec, tol: f64) -> Result<Surface> {
    grid.validate()?;
    let v1 = grid.axis1.values();
    let v2 = grid.axis2.values();

    // Pre-compute Λ per unique temperature appearing anywhere in the grid.
    let mut rate_cache: HashMap<u64, f64> = HashMap::new();
    let temps: Vec<f64> = match (grid.axis1.kind, grid.axis2.kind) {
        (AxisKind::Temperature, _) => v1.clone(),
        (_, AxisKind::Temperature) => v2.clone(),
        _ => vec![grid.base.temperature],
    };
    for &temp in &temps {
        if temp > 0.0 {
            rate_cache
                .entry(temp.to_bits())
                .or_insert(total_rate_quadrature(&grid.base.molecule, temp, tol)?);
        }
    }

    let nodes: Vec<(f64, f64)> = v1
        .iter()
        .flat_map(|&a| v2.iter().map(move |&b| (a, b)))
        .collect();
    let values: Vec<f64> = par_map(nodes, |(a, b)| {
        let cfg = grid.config_at(a, b);
        if cfg.temperature == 0.0 {
            return 1.0;
        }
        let lambda = match rate_cache.get(&cfg.temperature.to_bits()) {
            Some(&l) => l,
            None => return f64::NAN,
        };
        match visibility_with_rate(&cfg, tol, lambda) {
            Ok(vis) => vis.visibility,
            Err(_) => f64::NAN,
        }
    });
    let failed = values.iter().filter(|v| v.is_nan()).count();
    Ok(Surface {
        axis1: grid.axis1,
        axis2: grid.axis2,
        values,
        failed_nodes: failed,
    })
}

/// T_dec at every (d, t) node, shared bracket; no-root nodes carry NaN
/// without counting as failures.
pub fn tdec_surface(
    grid: &GridSpec,
    bracket: (f64, f64),
    tol_t: f64,
    quad_tol: f64,
) -> Result<Surface> {
    tdec_surface_at_level(grid, bracket, tol_t, quad_tol, 0.5)
}

/// As [`tdec_surface`] for a general level curve V = `level`.
pub fn tdec_surface_at_level(
    grid: &GridSpec,
    bracket: (f64, f64),
    tol_t: f64,
    quad_tol: f64,
    level: f64,
) -> Result<Surface> {
    grid.validate()?;
    let swept = [grid.axis1.kind, grid.axis2.kind];
    if swept.contains(&AxisKind::Temperature) {
        return Err(Error::InvalidParameter(
            "tdec surface sweeps d and t; temperature is the solved quantity".into(),
        ));
    }
    let v1 = grid.axis1.values();
    let v2 = grid.axis2.values();
    let nodes: Vec<(f64, f64)> = v1
        .iter()
        .flat_map(|&a| v2.iter().map(move |&b| (a, b)))
        .collect();
    let mol = grid.base.molecule.clone();
    let results: Vec<std::result::Result<f64, ()>> = par_map(nodes, |(a, b)| {
        let cfg = grid.config_at(a, b);
        match decoherence_temperature_at_level(
            &mol,
            cfg.slit_separation,
            cfg.flight_time,
            bracket,
            tol_t,
            quad_tol,
            level,
        ) {
            Ok(TdecOutcome::Root { temperature, .. }) => Ok(temperature),
            Ok(TdecOutcome::NoRoot { .. }) => Ok(f64::NAN),
            Err(_) => Err(()),
        }
    });
    let failed = results.iter().filter(|r| r.is_err()).count();
    let values = results
        .into_iter()
        .map(|r| r.unwrap_or(f64::NAN))
        .collect();
    Ok(Surface {
        axis1: grid.axis1,
        axis2: grid.axis2,
        values,
        failed_nodes: failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cfg() -> ExperimentConfig {
        ExperimentConfig::new(MoleculeParams::c70(), 2500.0, 1e-6, 1e-2).unwrap()
    }

    #[test]
    fn monotonicity_validator() {
        assert!(is_non_decreasing(&[-3.0, -1.0, 0.0, 2.0]));
        assert!(is_non_decreasing(&[1.0, 1.0, 1.0]));
        assert!(!is_non_decreasing(&[-3.0, -1.0, -1.5, 2.0]));
        // Tiny backwards jitter within quadrature noise is tolerated.
        assert!(is_non_decreasing(&[1.0, 1.0 - 1e-12, 2.0]));
    }

    #[test]
    fn tdec_is_a_root_of_the_level_curve() {
        let mol = MoleculeParams::c70();
        let out = decoherence_temperature(&mol, 1e-6, 1e-2, (10.0, 4000.0), 1.0, 1e-10).unwrap();
        let TdecOutcome::Root { temperature, h_at_root } = out else {
            panic!("expected a root");
        };
        assert!(temperature > 0.0 && temperature < 3000.0, "T_dec = {temperature}");
        // Residual bounded by |h'|·tol_t near the root.
        assert!(h_at_root.abs() < 0.02, "h(T_dec) = {h_at_root}");
        let cfg = ExperimentConfig::new(mol, temperature, 1e-6, 1e-2).unwrap();
        let vis = crate::visibility::visibility_closed_form(&cfg, 1e-11).unwrap();
        assert!(
            (0.49..=0.51).contains(&vis.visibility),
            "V(T_dec) = {}",
            vis.visibility
        );
    }

    #[test]
    fn tdec_decreases_with_d_and_t() {
        let mol = MoleculeParams::c70();
        let solve = |d: f64, t: f64| {
            decoherence_temperature(&mol, d, t, DEFAULT_BRACKET, 0.01, 1e-10)
                .unwrap()
                .temperature()
                .unwrap()
        };
        let base = solve(0.5e-6, 8e-3);
        assert!(solve(1e-6, 8e-3) < base);
        assert!(solve(0.5e-6, 16e-3) < base);
    }

    #[test]
    fn transition_is_sharp_in_temperature() {
        // Width of the V ∈ [0.1, 0.9] band, relative to T_dec itself.
        let mol = MoleculeParams::c70();
        let level_t = |level: f64| {
            decoherence_temperature_at_level(&mol, 1e-6, 1e-2, (10.0, 5000.0), 0.01, 1e-10, level)
                .unwrap()
                .temperature()
                .unwrap()
        };
        let t_dec = level_t(0.5);
        let band = level_t(0.1) - level_t(0.9);
        assert!(band > 0.0);
        assert!(
            band / t_dec < 0.5,
            "band {band} K vs T_dec {t_dec} K"
        );
    }

    #[test]
    fn shrinking_separation_raises_tdec() {
        // 1 μm → 0.02 μm at fixed flight time.
        let mol = MoleculeParams::c70();
        let solve = |d: f64| {
            decoherence_temperature(&mol, d, 1e-2, DEFAULT_BRACKET, 0.01, 1e-10)
                .unwrap()
                .temperature()
                .unwrap()
        };
        assert!(solve(0.02e-6) > solve(1e-6));
    }

    #[test]
    fn no_root_is_a_typed_outcome() {
        let mol = MoleculeParams::c70();
        // At 1 nm separation the visibility never drops to 1/2 below 100 K.
        let out = decoherence_temperature(&mol, 1e-9, 1e-3, (10.0, 100.0), 0.1, 1e-10).unwrap();
        assert!(matches!(out, TdecOutcome::NoRoot { h_lo, h_hi }
            if h_lo < 0.0 && h_hi < 0.0));
    }

    #[test]
    fn visibility_surface_bounds_and_monotonicity() {
        let grid = GridSpec {
            axis1: AxisSpec {
                kind: AxisKind::Temperature,
                min: 0.0,
                max: 3000.0,
                count: 7,
                log: false,
            },
            axis2: AxisSpec {
                kind: AxisKind::FlightTime,
                min: 3e-3,
                max: 20e-3,
                count: 5,
                log: false,
            },
            base: base_cfg(),
        };
        let surface = visibility_surface(&grid, 1e-9).unwrap();
        assert_eq!(surface.failed_nodes, 0);
        assert!(surface
            .values
            .iter()
            .all(|&v| (0.0..=1.0).contains(&v)));
        // T = 0 row is the exact quantum limit.
        for j in 0..5 {
            assert_eq!(surface.value(0, j), 1.0);
        }
        // Each T-row is non-increasing along growing flight time.
        for i in 0..7 {
            for j in 1..5 {
                assert!(surface.value(i, j) <= surface.value(i, j - 1) + 1e-12);
            }
        }
    }

    #[test]
    fn tdec_surface_monotone_and_consistent_with_direct_solve() {
        let grid = GridSpec {
            axis1: AxisSpec {
                kind: AxisKind::SlitSeparation,
                min: 0.25e-6,
                max: 1e-6,
                count: 4,
                log: false,
            },
            axis2: AxisSpec {
                kind: AxisKind::FlightTime,
                min: 5e-3,
                max: 20e-3,
                count: 4,
                log: false,
            },
            base: base_cfg(),
        };
        let surface = tdec_surface(&grid, DEFAULT_BRACKET, 0.01, 1e-9).unwrap();
        assert_eq!(surface.failed_nodes, 0);
        for i in 0..4 {
            for j in 0..4 {
                let v = surface.value(i, j);
                assert!(v.is_nan() || v > 0.0);
                if i > 0 && !surface.value(i - 1, j).is_nan() && !v.is_nan() {
                    assert!(v <= surface.value(i - 1, j) + 0.02);
                }
                if j > 0 && !surface.value(i, j - 1).is_nan() && !v.is_nan() {
                    assert!(v <= surface.value(i, j - 1) + 0.02);
                }
            }
        }

        // A grid node is exactly the direct solve.
        let direct = decoherence_temperature(
            &grid.base.molecule,
            1e-6,
            20e-3,
            DEFAULT_BRACKET,
            0.01,
            1e-9,
        )
        .unwrap()
        .temperature()
        .unwrap();
        assert_eq!(surface.value(3, 3).to_bits(), direct.to_bits());
    }

    #[test]
    fn surfaces_are_bit_reproducible() {
        let grid = GridSpec {
            axis1: AxisSpec {
                kind: AxisKind::Temperature,
                min: 500.0,
                max: 2500.0,
                count: 4,
                log: false,
            },
            axis2: AxisSpec {
                kind: AxisKind::SlitSeparation,
                min: 0.1e-6,
                max: 1e-6,
                count: 4,
                log: true,
            },
            base: base_cfg(),
        };
        let a = visibility_surface(&grid, 1e-9).unwrap();
        let b = visibility_surface(&grid, 1e-9).unwrap();
        let bits = |s: &Surface| s.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}
