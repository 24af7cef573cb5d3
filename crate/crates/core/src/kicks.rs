//! Compound-Poisson momentum kicks.
//!
//! A photon of frequency ω recoils the particle by ħω/c; isotropic
//! emission projects onto the slit axis with a uniform direction cosine.
//! This module carries the one-dimensional jump density W(Δp), its
//! characteristic function f(x) = ⟨exp(i x Δp/ħ)⟩, the flight-averaged
//! decoherence factor ζ, and trajectory sampling.

use serde::Serialize;

use crate::constants::{C_LIGHT, HBAR, K_B};
use crate::quad;
use crate::rng::RandomStream;
use crate::special::{one_minus_sinc, sinc};
use crate::spectrum::{
    rate_prefactor, sample_frequency, spectral_moment, EmissionSpectrum,
};
use crate::{Error, Result};

/// Internal quadrature tolerance; tight enough that the two closed-form
/// visibility routes agree to 1e-9 relative.
const KICK_QUAD_TOL: f64 = 1e-12;

/// The jump law implied by an emission spectrum: Poisson events at rate Λ,
/// each carrying a symmetric momentum jump.
#[derive(Clone, Debug)]
pub struct KickLaw {
    pub spectrum: EmissionSpectrum,
    /// Event rate Λ (s⁻¹), copied from the spectrum.
    pub rate: f64,
}

impl KickLaw {
    pub fn new(spectrum: EmissionSpectrum) -> Result<Self> {
        if !(spectrum.total_rate > 0.0 && spectrum.total_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kick law needs a positive total rate, got {}",
                spectrum.total_rate
            )));
        }
        let rate = spectrum.total_rate;
        Ok(KickLaw { spectrum, rate })
    }

    /// Dimensionless sinc scale for a length argument: sinc(ωx/c) in the
    /// substituted variable is sinc(κ·x') with κ = (k_BT/ħ)·x/c.
    fn kappa(&self, length: f64) -> f64 {
        self.spectrum.thermal_frequency() * length / C_LIGHT
    }

    /// Λ divided by its prefactor: the dimensionless spectral integral,
    /// used as the absolute scale for near-cancelling quadratures.
    fn dimensionless_total(&self) -> f64 {
        self.rate / rate_prefactor(&self.spectrum.molecule, self.spectrum.temperature)
    }
}

/// One realization of the compound Poisson process.
#[derive(Clone, Debug, Serialize)]
pub struct KickTrajectory {
    /// Flight time t (s).
    pub flight_time: f64,
    /// Ascending emission times in [0, t].
    pub event_times: Vec<f64>,
    /// Momentum jumps Δp_k (kg·m/s), one per event.
    pub jumps: Vec<f64>,
}

/// One-dimensional jump density W(Δp) = (c/2ħΛ)·∫_{c|Δp|/ħ}^∞ R_T(ω)/ω dω.
pub fn w_density(law: &KickLaw, dp: f64) -> Result<f64> {
    let t = law.spectrum.temperature;
    let mol = &law.spectrum.molecule;
    // Lower limit in x-units: ħω_min/k_BT with ω_min = c|Δp|/ħ.
    let x_lo = C_LIGHT * dp.abs() / (K_B * t);
    let s = spectral_moment(mol, -1, x_lo, |_| 1.0, KICK_QUAD_TOL, 0.0)?;
    // ∫R/ω dω = pref·(ħ/k_BT)·S with one power of ω removed.
    let integral = rate_prefactor(mol, t) * HBAR / (K_B * t) * s.value;
    Ok(C_LIGHT / (2.0 * HBAR * law.rate) * integral)
}

/// Characteristic function f(x) = (1/Λ)·∫ R_T(ω) sinc(ωx/c) dω; real
/// because W is symmetric. `x` is a length (m).
pub fn characteristic_function(law: &KickLaw, x: f64) -> Result<f64> {
    let kappa = law.kappa(x);
    let mol = &law.spectrum.molecule;
    let scale = law.dimensionless_total();
    let s = spectral_moment(
        mol,
        0,
        0.0,
        |u| sinc(kappa * u),
        KICK_QUAD_TOL,
        1e-13 * scale,
    )?;
    Ok(s.value / scale)
}

/// 1 - f(x) as a single positive-kernel quadrature: no cancellation when
/// f is close to 1 (small x or low temperature).
pub(crate) fn one_minus_cf(law: &KickLaw, x: f64) -> Result<f64> {
    let kappa = law.kappa(x);
    let mol = &law.spectrum.molecule;
    let s = spectral_moment(mol, 0, 0.0, |u| one_minus_sinc(kappa * u), KICK_QUAD_TOL, 0.0)?;
    Ok(s.value / law.dimensionless_total())
}

/// Geometric decoherence factor ζ(d) = ∫₀¹ [1 - f(s·d)] ds. Fixed-order
/// Gauss-Legendre in s, order doubled until the value settles.
pub fn zeta_factor(law: &KickLaw, d: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "slit separation must be nonnegative, got {d}"
        )));
    }
    if d == 0.0 {
        return Ok(0.0);
    }
    let mut previous = f64::NAN;
    let mut change = f64::NAN;
    let mut order = 32_usize;
    while order <= 1024 {
        let (nodes, weights) = quad::gauss_legendre_nodes(order);
        let mut sum = 0.0;
        for (node, weight) in nodes.iter().zip(&weights) {
            let s = 0.5 * (node + 1.0);
            sum += 0.5 * weight * one_minus_cf(law, s * d)?;
        }
        change = (sum - previous).abs();
        if change <= 1e-12 * sum.abs().max(1e-300) {
            return Ok(sum);
        }
        previous = sum;
        order *= 2;
    }
    // Wide separations push many sinc oscillations into [0, 1]; refuse to
    // hand back an unsettled value.
    if change > 1e-9 * previous.abs() {
        return Err(Error::QuadratureNonConvergence {
            value: previous,
            error: change,
            segments: 1024,
            tol: 1e-9,
        });
    }
    Ok(previous)
}

/// One momentum jump Δp = (ħω/c)·u with ω from the spectrum sampler and
/// u uniform on [-1, 1). Reproduces W(Δp) exactly by construction.
pub fn sample_kick(law: &KickLaw, stream: &mut RandomStream) -> Result<f64> {
    let omega = sample_frequency(&law.spectrum, stream)?;
    let u = stream.symmetric_unit();
    Ok(HBAR * omega / C_LIGHT * u)
}

/// A full trajectory: n ~ Poisson(Λt) events, times uniform on [0, t]
/// (sorted), jumps independent.
pub fn sample_trajectory(law: &KickLaw, t: f64, stream: &mut RandomStream) -> Result<KickTrajectory> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "flight time must be nonnegative, got {t}"
        )));
    }
    let n = stream.poisson(law.rate * t) as usize;
    let mut event_times: Vec<f64> = (0..n).map(|_| stream.range(0.0, t)).collect();
    event_times.sort_unstable_by(f64::total_cmp);
    let mut jumps = Vec::with_capacity(n);
    for _ in 0..n {
        jumps.push(sample_kick(law, stream)?);
    }
    Ok(KickTrajectory {
        flight_time: t,
        event_times,
        jumps,
    })
}
