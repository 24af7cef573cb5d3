//! Closed-form observables: the attenuation integral G(T,d), the fringe
//! visibility V(T,d,t) = exp(-[Λ-G]t), the screen intensity pattern, and
//! the interference-condition diagnostics.

use serde::Serialize;

use crate::constants::{C_LIGHT, HBAR, K_B};
use crate::special::{one_minus_si_over_x, si_over_x};
use crate::spectrum::{
    rate_prefactor, spectral_moment, sum_by_smallest_term, total_rate_quadrature,
    total_rate_series, MoleculeParams, TruncationReport,
};
use crate::{Error, Result};

const PI: f64 = std::f64::consts::PI;

/// A double-slit flight: who flies, how hot, through what geometry.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub molecule: MoleculeParams,
    /// Internal temperature (K).
    pub temperature: f64,
    /// Slit separation d (m).
    pub slit_separation: f64,
    /// Time of flight t (s).
    pub flight_time: f64,
    /// Gaussian momentum width σ_p of the single-slit state (kg·m/s).
    /// Sets only the envelope shape, never the visibility.
    pub slit_width_momentum: f64,
}

impl ExperimentConfig {
    /// Default slit width 100 nm; σ_p = ħ/(2·width).
    pub const DEFAULT_SLIT_WIDTH: f64 = 100e-9;

    pub fn new(
        molecule: MoleculeParams,
        temperature: f64,
        slit_separation: f64,
        flight_time: f64,
    ) -> Result<Self> {
        let cfg = ExperimentConfig {
            molecule,
            temperature,
            slit_separation,
            flight_time,
            slit_width_momentum: HBAR / (2.0 * Self::DEFAULT_SLIT_WIDTH),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_slit_momentum_width(mut self, sigma_p: f64) -> Result<Self> {
        self.slit_width_momentum = sigma_p;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.molecule.validate()?;
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !(self.slit_separation >= 0.0 && self.slit_separation <= 1e-4) {
            return Err(Error::InvalidParameter(format!(
                "slit separation must lie in [0, 1e-4] m, got {}",
                self.slit_separation
            )));
        }
        if !(self.flight_time >= 0.0 && self.flight_time.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "flight time must be nonnegative, got {}",
                self.flight_time
            )));
        }
        if !(self.slit_width_momentum > 0.0 && self.slit_width_momentum.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "slit momentum width must be positive, got {}",
                self.slit_width_momentum
            )));
        }
        Ok(())
    }
}

/// Visibility with the rates that produced it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct VisibilityResult {
    /// Fringe contrast V in [0, 1].
    pub visibility: f64,
    /// Fringe phase φ (rad); zero for the symmetric jump law.
    pub phase: f64,
    /// Total emission rate Λ (s⁻¹).
    pub lambda: f64,
    /// Attenuation integral G(T,d) (s⁻¹); Λ ≥ G ≥ 0.
    pub g_factor: f64,
    /// Decoherence strength per event, ζ = (Λ-G)/Λ.
    pub zeta: f64,
}

/// Screen intensity on a position grid.
#[derive(Clone, Debug, Serialize)]
pub struct FringePattern {
    /// Screen coordinates x (m).
    pub positions: Vec<f64>,
    /// Intensity I(x,t).
    pub intensity: Vec<f64>,
    /// Kick-free envelope I₀(x,t).
    pub envelope: Vec<f64>,
}

/// β = d·k_BT/(ħc): the sinc argument per unit of the substituted
/// spectral variable.
fn beta(temperature: f64, d: f64) -> f64 {
    K_B * temperature * d / (HBAR * C_LIGHT)
}

/// G(T,d) = ∫₀^∞ R_T(ω)·Si(ωd/c)/(ωd/c) dω — the inner s-average of
/// sinc done in closed form through the sine integral.
pub fn g_attenuation_quadrature(
    mol: &MoleculeParams,
    temperature: f64,
    d: f64,
    tol: f64,
) -> Result<f64> {
    mol.validate()?;
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if !(d >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "slit separation must be nonnegative, got {d}"
        )));
    }
    let b = beta(temperature, d);
    let s = spectral_moment(mol, 0, 0.0, |x| si_over_x(b * x), tol, 0.0)?;
    Ok(rate_prefactor(mol, temperature) * s.value)
}

/// Λ(T) - G(T,d) as one quadrature of the positive kernel 1 - Si(a)/a.
/// This is the decay rate of the visibility; computing it directly avoids
/// the catastrophic cancellation of Λ - G when G ≈ Λ.
pub(crate) fn attenuation_deficit(
    mol: &MoleculeParams,
    temperature: f64,
    d: f64,
    tol: f64,
) -> Result<f64> {
    let b = beta(temperature, d);
    let s = spectral_moment(mol, 0, 0.0, |x| one_minus_si_over_x(b * x), tol, 0.0)?;
    Ok(rate_prefactor(mol, temperature) * s.value)
}

/// G(T,d) from the term-by-term series, each term carrying an arctan
/// kernel integral; smallest-term truncation as for the rate series.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AttenuationSeries {
    pub rate: f64,
    pub report: TruncationReport,
}

pub fn g_attenuation_series(
    mol: &MoleculeParams,
    temperature: f64,
    d: f64,
) -> Result<AttenuationSeries> {
    mol.validate()?;
    if mol.n_modes < 10.0 {
        return Err(Error::InvalidParameter(format!(
            "series requires n_modes >= 10, got {}",
            mol.n_modes
        )));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if !(d >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "slit separation must be nonnegative, got {d}"
        )));
    }
    if d == 0.0 {
        // Each inner integral degenerates to (2m+ℓ+2)·β/β; the series is
        // exactly the total-rate series.
        let series = total_rate_series(mol, temperature)?;
        return Ok(AttenuationSeries {
            rate: series.rate,
            report: series.report,
        });
    }

    let b = beta(temperature, d);
    let ell = mol.ell;
    let n_modes = mol.n_modes;
    // Coefficients (-1)^m (2m+ℓ+1)!/((2N)^m m!) by recurrence.
    let c0: f64 = (1..=u64::from(ell) + 1).map(|k| k as f64).product();
    let mut coeff = c0;
    let mut m = 0_usize;
    let terms = std::iter::from_fn(move || {
        let order = 2 * m as u32 + ell + 2;
        let term = arctan_kernel_integral(order, b).map(|j| coeff * j);
        let mf = m as f64;
        let lf = ell as f64;
        coeff *= -(2.0 * mf + lf + 3.0) * (2.0 * mf + lf + 2.0) / (2.0 * n_modes * (mf + 1.0));
        m += 1;
        Some(term)
    });
    let max_terms = (mol.n_modes as usize).max(2);
    let (sum, report) = sum_by_smallest_term(terms, max_terms)?;
    let pref = mol.a_ell / (PI * PI * C_LIGHT * d)
        * (K_B * temperature / HBAR).powi(ell as i32 + 2);
    Ok(AttenuationSeries {
        rate: pref * sum,
        report,
    })
}

/// ∫₀^β sin(n·arctan x) / (x·(1+x²)^(n/2)) dx. The integrand tends to n
/// at x → 0; a quadratic series branch covers the 0/0 region.
fn arctan_kernel_integral(n: u32, upper: f64) -> Result<f64> {
    let nf = f64::from(n);
    let integrand = move |x: f64| {
        if x < 1e-4 {
            nf - nf * (nf + 1.0) * (nf + 2.0) * x * x / 6.0
        } else {
            (nf * x.atan()).sin() / (x * (0.5 * nf * (x * x).ln_1p()).exp())
        }
    };
    // (1+x²)^(n/2) beyond e^60 contributes nothing at f64 resolution.
    let cut = ((120.0 / nf).exp_m1()).sqrt();
    let b = upper.min(cut);
    let r = crate::quad::adaptive(integrand, 0.0, b, 1e-11, 1e-15 * nf * b)?;
    Ok(r.value)
}

/// V(T,d,t) = exp(-[Λ(T)-G(T,d)]·t), with Λ, G, ζ reported alongside.
/// The exponent is evaluated as a single cancellation-free quadrature.
pub fn visibility_closed_form(cfg: &ExperimentConfig, tol: f64) -> Result<VisibilityResult> {
    cfg.validate()?;
    let lambda = total_rate_quadrature(&cfg.molecule, cfg.temperature, tol)?;
    visibility_with_rate(cfg, tol, lambda)
}

/// As [`visibility_closed_form`] with Λ(T) supplied by the caller;
/// surface sweeps cache Λ per unique temperature through this.
pub(crate) fn visibility_with_rate(
    cfg: &ExperimentConfig,
    tol: f64,
    lambda: f64,
) -> Result<VisibilityResult> {
    cfg.validate()?;
    let deficit = attenuation_deficit(&cfg.molecule, cfg.temperature, cfg.slit_separation, tol)?;
    let visibility = (-deficit * cfg.flight_time).exp();
    Ok(VisibilityResult {
        visibility,
        phase: 0.0,
        lambda,
        g_factor: lambda - deficit,
        zeta: if lambda > 0.0 { deficit / lambda } else { 0.0 },
    })
}

/// Gaussian single-slit momentum density |ψ̃_slit(p)|².
fn slit_momentum_density(p: f64, sigma_p: f64) -> f64 {
    (-(p * p) / (2.0 * sigma_p * sigma_p)).exp() / (sigma_p * (2.0 * PI).sqrt())
}

/// I(x,t) = I₀(x,t)·[1 + V·cos(mdx/ħt + φ)] on the given screen grid,
/// with the far-field envelope I₀ = (m/t)|ψ̃_slit(mx/t)|².
pub fn fringe_pattern(
    cfg: &ExperimentConfig,
    vis: &VisibilityResult,
    positions: &[f64],
) -> FringePattern {
    assert!(cfg.flight_time > 0.0, "fringe pattern needs t > 0");
    let m_over_t = cfg.molecule.mass / cfg.flight_time;
    let d = cfg.slit_separation;
    let mut intensity = Vec::with_capacity(positions.len());
    let mut envelope = Vec::with_capacity(positions.len());
    for &x in positions {
        let p = m_over_t * x;
        let env = m_over_t * slit_momentum_density(p, cfg.slit_width_momentum);
        envelope.push(env);
        intensity.push(env * (1.0 + vis.visibility * (p * d / HBAR + vis.phase).cos()));
    }
    FringePattern {
        positions: positions.to_vec(),
        intensity,
        envelope,
    }
}

/// Fringe period 2πħt/(md) of the ideal pattern.
pub fn fringe_spacing(cfg: &ExperimentConfig) -> f64 {
    2.0 * PI * HBAR * cfg.flight_time / (cfg.molecule.mass * cfg.slit_separation)
}

/// Far-field figure of merit t/(md²/ħ); ≳ 10 means the stationary-phase
/// pattern is trustworthy. Reported, never enforced.
pub fn far_field_check(cfg: &ExperimentConfig) -> f64 {
    cfg.flight_time * HBAR / (cfg.molecule.mass * cfg.slit_separation * cfg.slit_separation)
}

/// Exchanged-action diagnostics for the interference condition
/// Δp_tot·d ≲ ħ ≪ k_BT·t.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ActionExchange {
    /// Random-walk momentum transfer √(Λt)·Δp_rms (kg·m/s).
    pub dp_total: f64,
    /// Δp_tot·d/ħ; interference needs ≲ 1.
    pub action_ratio: f64,
    /// k_BT·t/ħ; the classical-action scale, must be ≫ 1.
    pub thermal_ratio: f64,
}

pub fn action_exchange_check(cfg: &ExperimentConfig) -> Result<ActionExchange> {
    cfg.validate()?;
    let tol = 1e-10;
    let mol = &cfg.molecule;
    let t = cfg.temperature;
    let lambda = total_rate_quadrature(mol, t, tol)?;
    // ⟨Δp²⟩ under W: (ħω/c)²·⟨u²⟩ with ⟨u²⟩ = 1/3 for the direction cosine.
    let s0 = spectral_moment(mol, 0, 0.0, |_| 1.0, tol, 0.0)?.value;
    let s2 = spectral_moment(mol, 2, 0.0, |_| 1.0, tol, 0.0)?.value;
    let dp_rms = HBAR * (K_B * t / HBAR) / C_LIGHT * (s2 / s0 / 3.0).sqrt();
    let dp_total = (lambda * cfg.flight_time).sqrt() * dp_rms;
    Ok(ActionExchange {
        dp_total,
        action_ratio: dp_total * cfg.slit_separation / HBAR,
        thermal_ratio: K_B * t * cfg.flight_time / HBAR,
    })
}
