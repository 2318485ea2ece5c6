//! Physical constants (CODATA 2018, SI).

use std::f64::consts::PI;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Unified atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Standard free-fall acceleration used as the default mean acceleration, m/s².
pub const G_EARTH: f64 = 9.8;
/// Rb D2 vacuum wavelength, m.
pub const RB_D2_WAVELENGTH: f64 = 780.241_209_686e-9;

/// Two-photon wavenumber of counter-propagating Raman beams at `wavelength`.
pub fn k_eff_counterpropagating(wavelength: f64) -> f64 {
    2.0 * 2.0 * PI / wavelength
}

/// Angular frequency from an ordinary frequency in Hz.
pub fn two_pi_hz(f: f64) -> f64 {
    2.0 * PI * f
}
