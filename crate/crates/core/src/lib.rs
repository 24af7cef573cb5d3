//! Double-slit interference of a hot mesoscopic particle in a Poissonian
//! photon-emission environment.
//!
//! A particle with internal temperature T flying through a double slit
//! emits thermal photons; each emission kicks the center of mass and the
//! accumulated kicks wash out the fringes. This crate carries the full
//! model: the generalized-Planck emission spectrum and its total rate
//! Λ(T), the compound-Poisson kick process, the closed-form visibility
//! V(T,d,t) = exp(-[Λ(T)-G(T,d)]t), the decoherence temperature defined
//! by V = 1/2, and an independent Monte Carlo estimator that checks the
//! closed forms trajectory by trajectory.
//!
//! Everything is SI internally. Closed-form and stochastic routes never
//! share a code path beyond the spectrum itself, so their agreement is a
//! real cross-check rather than a tautology.

// Validation guards use `!(a < b)` on purpose: the negation rejects NaN,
// which `a >= b` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod decoherence;
pub mod kicks;
pub mod montecarlo;
pub mod quad;
pub mod rng;
pub mod special;
pub mod spectrum;
pub mod visibility;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("quadrature did not converge: value {value:e} ± {error:e} over {segments} segments (tol {tol:e})")]
    QuadratureNonConvergence {
        value: f64,
        error: f64,
        segments: usize,
        tol: f64,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("asymptotic series grows from the first term (|t1/t0| = {ratio:.3}); n_modes too small for the large-N regime")]
    SeriesDiverges { ratio: f64 },
    #[error("rejection sampler exceeded {cap} iterations; the spectrum parameters are malformed")]
    SamplerStuck { cap: u32 },
    #[error("level-curve function is not monotone on the validation grid inside [{t_lo}, {t_hi}] K")]
    BracketNotMonotone { t_lo: f64, t_hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Ordered parallel map: batch i of the output always comes from item i,
/// so results are identical with and without the `parallel` feature and
/// at any worker count.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

pub use decoherence::{
    decoherence_temperature, decoherence_temperature_at_level, tdec_surface,
    tdec_surface_at_level, visibility_surface, AxisKind, AxisSpec, GridSpec, Surface, TdecOutcome,
    DEFAULT_BRACKET,
};
pub use kicks::{
    characteristic_function, sample_kick, sample_trajectory, w_density, zeta_factor, KickLaw,
    KickTrajectory,
};
pub use montecarlo::{
    build_comparison, compare_to_closed_form, estimate_f, estimate_pattern, write_trajectories,
    Comparison, EmpiricalPattern, McConfig, McEstimate,
};
pub use rng::RandomStream;
pub use spectrum::{
    absorption_cross_section, emission_rate_density, sample_frequency, total_rate_quadrature,
    total_rate_series, EmissionSpectrum, MoleculeParams, RateSeries, TruncationReport,
};
pub use visibility::{
    action_exchange_check, far_field_check, fringe_pattern, fringe_spacing,
    g_attenuation_quadrature, g_attenuation_series, visibility_closed_form, ActionExchange,
    AttenuationSeries, ExperimentConfig, FringePattern, VisibilityResult,
};
