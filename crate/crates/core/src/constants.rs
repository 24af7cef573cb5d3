//! Physical constants (CODATA 2018), SI units throughout.

/// Reduced Planck constant ħ (J s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant k_B (J/K). Exact since the 2019 SI redefinition.
pub const K_B: f64 = 1.380_649e-23;

/// Speed of light in vacuum c (m/s). Exact.
pub const C_LIGHT: f64 = 299_792_458.0;

/// Unified atomic mass unit (kg).
pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;

/// nm² in m², for cross-section coefficients quoted in nm²·s^ℓ.
pub const NM2: f64 = 1e-18;
