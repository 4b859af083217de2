//! Sodium condensate parameter set.

use num_complex::Complex64;

use crate::lambda::AtomicParams;
use crate::units::{hz_to_angular, per_cm3_to_per_m3, w_per_cm2_to_w_per_m2};

pub const SODIUM_DENSITY_CM3: f64 = 3.3e12;
pub const SODIUM_G1_HZ: f64 = 21.4e6;
pub const SODIUM_PROBE_INTENSITY_W_CM2: f64 = 80e-6;
pub const SODIUM_COUPLING_INTENSITY_W_CM2: f64 = 55e-3;
/// Mean probe photon number at the preset probe intensity.
pub const SODIUM_PHOTONS: f64 = 25.0;

pub fn sodium_atoms() -> AtomicParams {
    AtomicParams {
        gamma31: hz_to_angular(5e6),
        gamma32: hz_to_angular(5e6),
        gamma12: hz_to_angular(38e3),
        omega12: hz_to_angular(1772e6),
        omega_opt: hz_to_angular(5.1e14),
        mu32: 22e-30,
        // no separate value given for the coupling transition
        mu31: 22e-30,
    }
}

/// Atom number density (m^-3).
pub fn sodium_density() -> f64 {
    per_cm3_to_per_m3(SODIUM_DENSITY_CM3)
}

pub fn sodium_g1() -> Complex64 {
    Complex64::new(hz_to_angular(SODIUM_G1_HZ), 0.0)
}

pub fn sodium_probe_intensity() -> f64 {
    w_per_cm2_to_w_per_m2(SODIUM_PROBE_INTENSITY_W_CM2)
}

pub fn sodium_coupling_intensity() -> f64 {
    w_per_cm2_to_w_per_m2(SODIUM_COUPLING_INTENSITY_W_CM2)
}
