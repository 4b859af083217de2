//! Optical response of an f-deformed Bose-Einstein condensate of Lambda
//! atoms under electromagnetically induced transparency: steady-state
//! coherences, deformed boson algebra, perturbative sector energies,
//! susceptibilities, dispersion, and pulse propagation.

pub mod config;
pub mod deformed;
pub mod dispersion;
pub mod emit;
pub mod error;
pub mod lambda;
pub mod presets;
pub mod sector;
pub mod susceptibility;
pub mod sweep;
pub mod units;
pub mod validate;

pub use error::{Error, Result};
