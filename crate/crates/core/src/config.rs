//! Run configuration: flat TOML keys mirroring the command-line flags.
//!
//! Frequencies and rates are given as cyclic values in Hz and converted to
//! rad/s on ingest. Collision rates `kappa` are plain s^-1 and are not
//! converted.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::deformed::CondensateParams;
use crate::error::{Error, Result};
use crate::lambda::{AtomicParams, ThirdOrderSource};
use crate::presets;
use crate::susceptibility::{photon_number_from_intensity, ChiPath, PhotonCalibration};
use crate::units::{hz_to_angular, per_cm3_to_per_m3, w_per_cm2_to_w_per_m2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(Error::Config(format!("unknown output format `{other}` (expected csv, json or svg)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_preset")]
    pub preset: String,

    pub gamma31_hz: Option<f64>,
    pub gamma32_hz: Option<f64>,
    pub gamma12_hz: Option<f64>,
    pub omega12_hz: Option<f64>,
    pub omega_hz: Option<f64>,
    pub mu32: Option<f64>,
    pub mu31: Option<f64>,
    pub g1_hz: Option<f64>,
    /// Atom number density (cm^-3).
    pub density_cm3: Option<f64>,

    /// Collision rates (s^-1).
    pub kappa: Vec<f64>,
    /// Condensate atom numbers; floats such as `1e14` are accepted.
    pub natoms: Vec<f64>,
    /// Treat `1/N` as exactly zero.
    #[serde(default)]
    pub eta_zero: bool,

    /// `[min, max]` detuning (Hz).
    pub delta_range: Option<[f64; 2]>,
    #[serde(default = "default_points")]
    pub points: usize,

    pub photons: Option<f64>,
    /// Probe intensity (W/cm^2); used when `photons` is absent.
    pub probe_intensity: Option<f64>,
    #[serde(default = "default_ne")]
    pub n_e: u64,

    #[serde(default = "default_formats")]
    pub format: Vec<OutputFormat>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub subtract_offset: bool,
    #[serde(default)]
    pub printed_path: bool,
    #[serde(default)]
    pub third_order: ThirdOrderSource,
    #[serde(default)]
    pub svg_timestamp: bool,
    #[serde(default = "default_tol")]
    pub luminal_tol: f64,
}

fn default_preset() -> String {
    "sodium".into()
}
fn default_points() -> usize {
    400
}
fn default_ne() -> u64 {
    1
}
fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv]
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_tol() -> f64 {
    crate::dispersion::LUMINAL_TOL
}

/// Default detuning window (Hz).
pub const DEFAULT_DELTA_RANGE_HZ: [f64; 2] = [-2e7, 2e7];

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: default_preset(),
            gamma31_hz: None,
            gamma32_hz: None,
            gamma12_hz: None,
            omega12_hz: None,
            omega_hz: None,
            mu32: None,
            mu31: None,
            g1_hz: None,
            density_cm3: None,
            kappa: vec![0.0, 0.005, 0.008],
            natoms: vec![1e14],
            eta_zero: true,
            delta_range: Some(DEFAULT_DELTA_RANGE_HZ),
            points: default_points(),
            photons: None,
            probe_intensity: None,
            n_e: default_ne(),
            format: default_formats(),
            out: default_out(),
            subtract_offset: false,
            printed_path: false,
            third_order: ThirdOrderSource::ClosedForm,
            svg_timestamp: false,
            luminal_tol: default_tol(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn resolve(&self) -> Result<ResolvedConfig> {
        if self.preset != "sodium" {
            return Err(Error::Config(format!("unknown preset `{}` (available: sodium)", self.preset)));
        }
        let base = presets::sodium_atoms();
        let hz = |v: Option<f64>, d: f64| v.map(hz_to_angular).unwrap_or(d);
        let atoms = AtomicParams {
            gamma31: hz(self.gamma31_hz, base.gamma31),
            gamma32: hz(self.gamma32_hz, base.gamma32),
            gamma12: hz(self.gamma12_hz, base.gamma12),
            omega12: hz(self.omega12_hz, base.omega12),
            omega_opt: hz(self.omega_hz, base.omega_opt),
            mu32: self.mu32.unwrap_or(base.mu32),
            mu31: self.mu31.unwrap_or(base.mu31),
        };
        atoms.validate()?;
        let g1 = Complex64::new(hz(self.g1_hz, presets::sodium_g1().re), 0.0);
        let density = per_cm3_to_per_m3(self.density_cm3.unwrap_or(presets::SODIUM_DENSITY_CM3));

        if self.kappa.is_empty() {
            return Err(Error::Config("at least one kappa value is required".into()));
        }
        if self.natoms.is_empty() {
            return Err(Error::Config("at least one natoms value is required".into()));
        }
        let mut condensates = Vec::with_capacity(self.kappa.len() * self.natoms.len());
        for &k in &self.kappa {
            for &n in &self.natoms {
                if !(n >= 1.0 && n.fract() == 0.0 && n < u64::MAX as f64) {
                    return Err(Error::Config(format!("natoms must be a positive integer, got {n}")));
                }
                let mut c = CondensateParams::new(n as u64, k, density)?;
                if self.eta_zero {
                    c = c.with_eta_zero();
                }
                condensates.push(c);
            }
        }

        let [lo, hi] = self
            .delta_range
            .ok_or_else(|| Error::Config("delta_range is required (e.g. [-2e7, 2e7] Hz)".into()))?;
        if !(lo < hi) {
            return Err(Error::Config(format!("delta_range must be increasing, got [{lo}, {hi}]")));
        }
        if self.points < 3 {
            return Err(Error::Config(format!("points must be at least 3, got {}", self.points)));
        }
        let delta_grid = linspace(hz_to_angular(lo), hz_to_angular(hi), self.points);

        let photons = match (self.photons, self.probe_intensity) {
            (Some(n), _) => n,
            (None, Some(i)) => photon_number_from_intensity(w_per_cm2_to_w_per_m2(i), &PhotonCalibration::sodium())?,
            (None, None) => presets::SODIUM_PHOTONS,
        };
        if !(photons >= 0.0) {
            return Err(Error::Config(format!("photon number must be >= 0, got {photons}")));
        }
        let formats: BTreeSet<OutputFormat> = self.format.iter().copied().collect();
        if formats.is_empty() {
            return Err(Error::Config("at least one output format is required".into()));
        }
        if !(self.luminal_tol >= 0.0) {
            return Err(Error::Config("luminal_tol must be >= 0".into()));
        }
        Ok(ResolvedConfig {
            atoms,
            g1,
            condensates,
            delta_grid,
            photons,
            n_e: self.n_e,
            path: if self.printed_path { ChiPath::Printed } else { ChiPath::Derived },
            subtract_offset: self.subtract_offset,
            third_order: self.third_order,
            formats,
            out: self.out.clone(),
            svg_timestamp: self.svg_timestamp,
            luminal_tol: self.luminal_tol,
            raw: self.clone(),
        })
    }
}

/// `n` evenly spaced points including both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_toml_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Configuration with every value filled in and converted to SI / rad/s.
#[derive(Clone, Debug)]
pub struct ResolvedConfig {
    pub atoms: AtomicParams,
    pub g1: Complex64,
    /// Cartesian product, kappa outer and atom number inner.
    pub condensates: Vec<CondensateParams>,
    /// Detuning grid (rad/s).
    pub delta_grid: Vec<f64>,
    pub photons: f64,
    pub n_e: u64,
    pub path: ChiPath,
    pub subtract_offset: bool,
    pub third_order: ThirdOrderSource,
    pub formats: BTreeSet<OutputFormat>,
    pub out: PathBuf,
    pub svg_timestamp: bool,
    pub luminal_tol: f64,
    pub raw: RunConfig,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::angular_to_hz;
    use approx::assert_relative_eq;

    #[test]
    fn sodium_preset_values() {
        let r = RunConfig::default().resolve().unwrap();
        assert_relative_eq!(angular_to_hz(r.atoms.omega12), 1772e6, max_relative = 1e-15);
        assert_relative_eq!(angular_to_hz(r.atoms.omega_opt), 5.1e14, max_relative = 1e-15);
        assert_relative_eq!(angular_to_hz(r.atoms.gamma31), 5e6, max_relative = 1e-15);
        assert_relative_eq!(angular_to_hz(r.atoms.gamma32), 5e6, max_relative = 1e-15);
        assert_relative_eq!(angular_to_hz(r.atoms.gamma12), 38e3, max_relative = 1e-15);
        assert_relative_eq!(angular_to_hz(r.g1.re), 21.4e6, max_relative = 1e-15);
        assert_eq!(r.atoms.mu32, 22e-30);
        assert_relative_eq!(r.condensates[0].density, 3.3e18, max_relative = 1e-15);
        assert_eq!(r.photons, 25.0);
        assert_eq!(r.condensates.len(), 3);
        assert!(r.condensates.iter().all(|c| c.eta == 0.0 && c.n_atoms == 100_000_000_000_000));
        assert_eq!(r.delta_grid.len(), 400);
    }

    #[test]
    fn intensity_sets_photons() {
        let c = RunConfig { probe_intensity: Some(160e-6), ..RunConfig::default() };
        assert_relative_eq!(c.resolve().unwrap().photons, 50.0, max_relative = 1e-14);
    }

    #[test]
    fn toml_round_trip_and_rejection() {
        let text = r#"
            kappa = [0.0, 0.005]
            natoms = [300, 200, 100]
            delta_range = [-1e7, 1e7]
            points = 21
            format = ["csv", "json"]
        "#;
        let c = RunConfig::from_toml_str(text).unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.condensates.len(), 6);
        assert_eq!((r.condensates[1].kappa, r.condensates[1].n_atoms), (0.0, 200));
        assert_eq!((r.condensates[3].kappa, r.condensates[3].n_atoms), (0.005, 300));
        let back = RunConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, c);

        let err = RunConfig::from_toml_str("kappa = [0.0]\nnatoms = [1]\nbogus = 3\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn validation_errors() {
        let missing = RunConfig { delta_range: None, ..RunConfig::default() };
        assert!(missing.resolve().unwrap_err().to_string().contains("delta_range"));
        assert!(RunConfig { points: 2, ..RunConfig::default() }.resolve().is_err());
        assert!(RunConfig { kappa: vec![], ..RunConfig::default() }.resolve().is_err());
        assert!(RunConfig { natoms: vec![2.5], ..RunConfig::default() }.resolve().is_err());
        assert!(RunConfig { preset: "rubidium".into(), ..RunConfig::default() }.resolve().is_err());
    }

    #[test]
    fn linspace_ends() {
        let g = linspace(-1.0, 1.0, 5);
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
