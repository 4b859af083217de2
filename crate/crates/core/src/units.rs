//! Physical constants (CODATA 2018, SI) and unit helpers.

use std::f64::consts::PI;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light in vacuum (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Atomic mass unit (kg).
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Cyclic frequency in Hz to angular frequency in rad/s.
#[inline]
pub fn hz_to_angular(f: f64) -> f64 {
    2.0 * PI * f
}

/// Angular frequency in rad/s to cyclic frequency in Hz.
#[inline]
pub fn angular_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}

/// Number density in cm^-3 to m^-3.
#[inline]
pub fn per_cm3_to_per_m3(n: f64) -> f64 {
    n * 1e6
}

/// Intensity in W/cm^2 to W/m^2.
#[inline]
pub fn w_per_cm2_to_w_per_m2(i: f64) -> f64 {
    i * 1e4
}
