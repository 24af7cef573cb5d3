//! Generalized-Planck photon emission of a hot mesoscopic particle.
//!
//! The spectral rate is R_T(ω) = ω² σ_abs(ω)/(π²c²) · exp[-x - x²/(2N)]
//! with x = ħω/k_BT and a power-law cross section σ_abs = a_ℓ ω^ℓ. The
//! finite mode count N enters through the heat capacity C_V = N k_B and
//! cuts the high-frequency tail below the Planck limit.
//!
//! All quadratures run on the substituted variable x, where the integrand
//! is O(1) and temperature enters only through an exact prefactor.

use serde::Serialize;

use crate::constants::{ATOMIC_MASS, C_LIGHT, HBAR, K_B, NM2};
use crate::quad::{self, QuadResult};
use crate::rng::RandomStream;
use crate::{Error, Result};

const PI: f64 = std::f64::consts::PI;

/// Rejection-sampler iteration cap; hitting it means the spectrum
/// parameters are malformed (acceptance is ~exp(-(ℓ+3)²/2N)).
const MAX_REJECTION: u32 = 100_000;

/// Physical description of the emitting particle.
#[derive(Clone, Debug, Serialize)]
pub struct MoleculeParams {
    pub name: String,
    /// Number of vibrational modes N (dimensionless, ≥ 1).
    pub n_modes: f64,
    /// Exponent ℓ of the cross-section power law.
    pub ell: u32,
    /// Cross-section coefficient a_ℓ (m²·s^ℓ).
    pub a_ell: f64,
    /// Particle mass (kg); used only by far-field diagnostics.
    pub mass: f64,
}

impl MoleculeParams {
    pub fn new(name: &str, n_modes: f64, ell: u32, a_ell: f64, mass: f64) -> Result<Self> {
        let mol = MoleculeParams {
            name: name.to_string(),
            n_modes,
            ell,
            a_ell,
            mass,
        };
        mol.validate()?;
        Ok(mol)
    }

    /// C60 fullerene: N = 170, σ_abs = a₄ω⁴ with a₄ = 7.04e-66 nm²s⁴.
    pub fn c60() -> Self {
        MoleculeParams {
            name: "C60".to_string(),
            n_modes: 170.0,
            ell: 4,
            a_ell: 7.04e-66 * NM2,
            mass: 720.0 * ATOMIC_MASS,
        }
    }

    /// C70 fullerene: N = 200, a₄ = 7.79e-66 nm²s⁴.
    pub fn c70() -> Self {
        MoleculeParams {
            name: "C70".to_string(),
            n_modes: 200.0,
            ell: 4,
            a_ell: 7.79e-66 * NM2,
            mass: 840.0 * ATOMIC_MASS,
        }
    }

    /// Look up a preset by (case-insensitive) name.
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "C60" => Some(Self::c60()),
            "C70" => Some(Self::c70()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_modes >= 1.0 && self.n_modes.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "n_modes must be a finite number >= 1, got {}",
                self.n_modes
            )));
        }
        if self.ell < 1 {
            return Err(Error::InvalidParameter("ell must be >= 1".into()));
        }
        if !(self.a_ell > 0.0 && self.a_ell.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "a_ell must be positive, got {}",
                self.a_ell
            )));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        Ok(())
    }
}

/// An emitter at a fixed internal temperature, with the total photon
/// rate Λ(T) cached at construction.
#[derive(Clone, Debug, Serialize)]
pub struct EmissionSpectrum {
    pub molecule: MoleculeParams,
    /// Internal temperature (K).
    pub temperature: f64,
    /// Total photon emission rate Λ(T) (s⁻¹).
    pub total_rate: f64,
}

impl EmissionSpectrum {
    pub fn new(molecule: MoleculeParams, temperature: f64, tol: f64) -> Result<Self> {
        let total_rate = total_rate_quadrature(&molecule, temperature, tol)?;
        Ok(EmissionSpectrum {
            molecule,
            temperature,
            total_rate,
        })
    }

    /// Thermal frequency scale k_BT/ħ (rad/s); ω = x·thermal_frequency.
    pub fn thermal_frequency(&self) -> f64 {
        K_B * self.temperature / HBAR
    }
}

/// σ_abs(ω) = a_ℓ ω^ℓ (m²).
pub fn absorption_cross_section(mol: &MoleculeParams, omega: f64) -> f64 {
    debug_assert!(omega >= 0.0);
    mol.a_ell * omega.powi(mol.ell as i32)
}

/// Spectral emission rate R_T(ω) (s⁻¹ per rad/s).
pub fn emission_rate_density(spec: &EmissionSpectrum, omega: f64) -> f64 {
    debug_assert!(omega >= 0.0);
    let x = HBAR * omega / (K_B * spec.temperature);
    let shrink = (-x - x * x / (2.0 * spec.molecule.n_modes)).exp();
    omega * omega * absorption_cross_section(&spec.molecule, omega) / (PI * PI * C_LIGHT * C_LIGHT)
        * shrink
}

/// a_ℓ/(π²c²) · (k_BT/ħ)^(ℓ+3): Λ(T) divided by the dimensionless
/// spectral integral.
pub(crate) fn rate_prefactor(mol: &MoleculeParams, temperature: f64) -> f64 {
    mol.a_ell / (PI * PI * C_LIGHT * C_LIGHT)
        * (K_B * temperature / HBAR).powi(mol.ell as i32 + 3)
}

/// Upper cutoff for the substituted variable x = ħω/k_BT. Beyond it the
/// integrand is below ~e⁻⁴⁰ of its peak for every physical parameter set.
pub(crate) fn x_cutoff(mol: &MoleculeParams) -> f64 {
    (mol.ell as f64 + 3.0) + 40.0 + (2.0 * mol.n_modes * 40.0).sqrt()
}

/// Geometric partition of [lo, x_max]; seeds the adaptive quadrature so
/// narrow support inside a wide interval is never missed.
fn geometric_breaks(lo: f64, x_max: f64) -> Vec<f64> {
    let mut breaks = vec![lo];
    let mut edge = (lo * 2.0).max(1.0);
    while edge < x_max {
        breaks.push(edge);
        edge *= 2.0;
    }
    breaks.push(x_max);
    breaks
}

/// ∫_{x_lo}^{x_max} x^(ℓ+2+offset) e^(-x - x²/2N) · kernel(x) dx
/// (dimensionless), by adaptive Gauss-Kronrod.
pub(crate) fn spectral_moment<K: Fn(f64) -> f64>(
    mol: &MoleculeParams,
    power_offset: i32,
    x_lo: f64,
    kernel: K,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    let p = mol.ell as i32 + 2 + power_offset;
    let inv_2n = 1.0 / (2.0 * mol.n_modes);
    let x_max = x_cutoff(mol);
    if x_lo >= x_max {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            segments: 0,
        });
    }
    let f = move |x: f64| x.powi(p) * (-x - x * x * inv_2n).exp() * kernel(x);
    quad::adaptive_segmented(f, &geometric_breaks(x_lo, x_max), rel_tol, abs_tol)
}

/// Λ(T) = ∫₀^∞ R_T(ω) dω by adaptive quadrature at relative tolerance `tol`.
pub fn total_rate_quadrature(mol: &MoleculeParams, temperature: f64, tol: f64) -> Result<f64> {
    mol.validate()?;
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be in (0, 1), got {tol}"
        )));
    }
    let s = spectral_moment(mol, 0, 0.0, |_| 1.0, tol, 0.0)?;
    Ok(rate_prefactor(mol, temperature) * s.value)
}

/// How an asymptotic series was truncated.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TruncationReport {
    /// Index m of the last included term.
    pub last_index: usize,
    /// Value of that term (in the dimensionless sum).
    pub last_term: f64,
    /// True if the tail fell below f64 resolution before the smallest term.
    pub converged: bool,
}

/// Total rate from the large-N asymptotic series, with its truncation report.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RateSeries {
    pub rate: f64,
    pub report: TruncationReport,
}

/// Smallest-term summation of an alternating asymptotic series. Terms are
/// accumulated while |t_{m+1}| < |t_m|; the first growing term is
/// excluded. Growth at the very first step is a divergence error — the
/// expansion parameter is too large for the asymptotic regime.
pub(crate) fn sum_by_smallest_term<I>(mut terms: I, max_terms: usize) -> Result<(f64, TruncationReport)>
where
    I: Iterator<Item = Result<f64>>,
{
    let first = terms.next().expect("series has at least one term")?;
    let mut prev = first;
    let mut sum = first;
    for m in 1..max_terms {
        let term = match terms.next() {
            Some(t) => t?,
            None => {
                return Ok((
                    sum,
                    TruncationReport {
                        last_index: m - 1,
                        last_term: prev,
                        converged: false,
                    },
                ))
            }
        };
        if term.abs() >= prev.abs() {
            if m == 1 {
                return Err(Error::SeriesDiverges {
                    ratio: (term / prev).abs(),
                });
            }
            return Ok((
                sum,
                TruncationReport {
                    last_index: m - 1,
                    last_term: prev,
                    converged: false,
                },
            ));
        }
        sum += term;
        prev = term;
        if term.abs() <= f64::EPSILON * sum.abs() {
            return Ok((
                sum,
                TruncationReport {
                    last_index: m,
                    last_term: term,
                    converged: true,
                },
            ));
        }
    }
    Ok((
        sum,
        TruncationReport {
            last_index: max_terms - 1,
            last_term: prev,
            converged: false,
        },
    ))
}

/// Terms of the dimensionless rate series Σ_m (-1)^m (2m+ℓ+2)!/((2N)^m m!),
/// generated by recurrence so large-m factorials never overflow.
pub(crate) fn lambda_series_terms(
    n_modes: f64,
    ell: u32,
) -> impl Iterator<Item = Result<f64>> {
    let t0: f64 = (1..=u64::from(ell) + 2).map(|k| k as f64).product();
    let mut term = t0;
    let mut m = 0_usize;
    std::iter::from_fn(move || {
        let current = term;
        let lf = ell as f64;
        let mf = m as f64;
        term *= -(2.0 * mf + lf + 4.0) * (2.0 * mf + lf + 3.0) / (2.0 * n_modes * (mf + 1.0));
        m += 1;
        Some(Ok(current))
    })
}

/// Λ(T) from the asymptotic large-N expansion, truncated at the smallest
/// term and never summed past m = N.
pub fn total_rate_series(mol: &MoleculeParams, temperature: f64) -> Result<RateSeries> {
    mol.validate()?;
    if mol.n_modes < 10.0 {
        return Err(Error::InvalidParameter(format!(
            "series requires n_modes >= 10 (asymptotic in large N), got {}",
            mol.n_modes
        )));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let max_terms = (mol.n_modes as usize).max(2);
    let (sum, report) = sum_by_smallest_term(lambda_series_terms(mol.n_modes, mol.ell), max_terms)?;
    Ok(RateSeries {
        rate: rate_prefactor(mol, temperature) * sum,
        report,
    })
}

/// Draw an emission frequency ω with density R_T(ω)/Λ(T): Gamma(ℓ+3)
/// envelope in x = ħω/k_BT (sum of ℓ+3 exponentials), accepted with
/// probability exp(-x²/2N). The Gaussian factor is ≤ 1 everywhere, so the
/// rejection is exact.
pub fn sample_frequency(spec: &EmissionSpectrum, stream: &mut RandomStream) -> Result<f64> {
    sample_frequency_counted(spec, stream).map(|(omega, _)| omega)
}

pub(crate) fn sample_frequency_counted(
    spec: &EmissionSpectrum,
    stream: &mut RandomStream,
) -> Result<(f64, u32)> {
    let shape = spec.molecule.ell + 3;
    let inv_2n = 1.0 / (2.0 * spec.molecule.n_modes);
    for tries in 1..=MAX_REJECTION {
        let x: f64 = (0..shape).map(|_| stream.exponential()).sum();
        if stream.uniform() < (-x * x * inv_2n).exp() {
            return Ok((x * spec.thermal_frequency(), tries));
        }
    }
    Err(Error::SamplerStuck { cap: MAX_REJECTION })
}
