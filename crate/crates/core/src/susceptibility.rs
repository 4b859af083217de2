//! Polarization and linear / nonlinear susceptibilities from the first-order
//! sector energies.
//!
//! At fixed exciton number `n_e` the shift `E_jm - E0_jm` is a cubic
//! polynomial in the photon number `n = j + m`. With the field per photon
//! `eps` and `E = eps sqrt(n)`, differentiating in `eps sqrt(n)` gives
//!
//! `P = -(1/eps) (2 c1 sqrt(n) + 4 c2 n^{3/2} + 6 c3 n^{5/2})`
//!
//! and matching powers of `E` yields `chi1 = -2 c1 / (eps^2 eps0)`,
//! `chi3 = -4 c2 / (eps^4 eps0)`, `chi5 = -6 c3 / (eps^6 eps0)`.
//!
//! The five perturbation terms are fitted separately, with unit coefficient,
//! and combined afterwards; the term coefficients span many orders of
//! magnitude (the probe frequency against the couplings) and summing values
//! before fitting would lose the small ones.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::deformed::CondensateParams;
use crate::error::{Error, Result};
use crate::lambda::{coupling_constants_with, AtomicParams, ThirdOrderSource};
use crate::sector::{term_diagonal_analytic, HamiltonianParams, RotatedSector};
use crate::units::{EPSILON_0, HBAR};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldQuantization {
    /// Field per photon (V/m).
    pub epsilon_per_photon: f64,
    /// Quantization volume (m^3).
    pub quant_volume: f64,
    pub photon_number: f64,
    /// Probe field amplitude `eps sqrt(n)` (V/m).
    pub e_wp: f64,
}

impl FieldQuantization {
    pub fn new(omega_p: f64, quant_volume: f64, photon_number: f64) -> Result<Self> {
        if !(omega_p > 0.0) {
            return Err(Error::invalid("omega_p", format!("must be positive, got {omega_p}")));
        }
        if !(quant_volume > 0.0) {
            return Err(Error::invalid("quant_volume", format!("must be positive, got {quant_volume}")));
        }
        if !(photon_number >= 0.0) {
            return Err(Error::invalid("photon_number", format!("must be >= 0, got {photon_number}")));
        }
        let eps = (HBAR * omega_p / (2.0 * EPSILON_0 * quant_volume)).sqrt();
        Ok(Self { epsilon_per_photon: eps, quant_volume, photon_number, e_wp: eps * photon_number.sqrt() })
    }

    /// `|E|^2 = eps^2 n`.
    pub fn intensity_factor(&self) -> f64 {
        self.epsilon_per_photon.powi(2) * self.photon_number
    }
}

/// How sector energies are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySource {
    /// Closed-form rotated diagonal.
    #[default]
    Analytic,
    /// Diagonal of the numerically rotated perturbation.
    Numeric,
}

/// `E_jm - E0_jm = c0 + c1 n + c2 n^2 + c3 n^3` (J) at fixed `n_e`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyPolynomial {
    pub c0: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub c3: Complex64,
}

impl EnergyPolynomial {
    pub fn eval(&self, n: f64) -> Complex64 {
        self.c0 + n * (self.c1 + n * (self.c2 + n * self.c3))
    }
}

/// Cubic-in-`n` polynomials of each perturbation term with unit coefficient,
/// at fixed `n_e`. Independent of the physical parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct TermPolynomials {
    pub n_e: u64,
    pub source: EnergySource,
    /// `coeffs[t] = [d0, d1, d2, d3]`.
    pub coeffs: [[f64; 4]; 5],
}

impl TermPolynomials {
    /// Interpolates each term through `n = 0..=3` and checks the fifth point
    /// `n = 4` against the cubic.
    pub fn new(n_e: u64, source: EnergySource) -> Result<Self> {
        let mut values = [[0.0; 5]; 5];
        for n in 0..5u64 {
            match source {
                EnergySource::Analytic => {
                    for (t, row) in values.iter_mut().enumerate() {
                        row[n as usize] = term_diagonal_analytic(t, n as f64, n_e as f64);
                    }
                }
                EnergySource::Numeric => {
                    let rs = RotatedSector::new(n + n_e)?;
                    // m = (n - n_e)/2 sits at basis index n
                    for (t, row) in values.iter_mut().enumerate() {
                        row[n as usize] = rs.term_diagonal(t, n as usize).re;
                    }
                }
            }
        }
        let vander = Matrix4::from_fn(|r, c| (r as f64).powi(c as i32));
        let lu = vander.lu();
        let mut coeffs = [[0.0; 4]; 5];
        for (t, vals) in values.iter().enumerate() {
            let x = lu
                .solve(&Vector4::new(vals[0], vals[1], vals[2], vals[3]))
                .expect("Vandermonde on 0..3 is invertible");
            let at4 = x[0] + 4.0 * (x[1] + 4.0 * (x[2] + 4.0 * x[3]));
            let lead = x.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
            let residual = (vals[4] - at4).abs();
            if residual > 1e-9 * lead {
                return Err(Error::NotCubic { residual });
            }
            coeffs[t] = [x[0], x[1], x[2], x[3]];
        }
        Ok(Self { n_e, source, coeffs })
    }

    pub fn combine(&self, params: &HamiltonianParams) -> EnergyPolynomial {
        let mut c = [Complex64::new(0.0, 0.0); 4];
        for (coef, poly) in params.term_coefficients().iter().zip(&self.coeffs) {
            for (k, d) in poly.iter().enumerate() {
                c[k] += coef * *d;
            }
        }
        let h = Complex64::new(HBAR, 0.0);
        EnergyPolynomial { c0: c[0] * h, c1: c[1] * h, c2: c[2] * h, c3: c[3] * h }
    }
}

pub fn energy_excess_polynomial(n_e: u64, params: &HamiltonianParams, source: EnergySource) -> Result<EnergyPolynomial> {
    Ok(TermPolynomials::new(n_e, source)?.combine(params))
}

/// `P = -(1/eps) (2 c1 sqrt(n) + 4 c2 n^{3/2} + 6 c3 n^{5/2})`.
pub fn polarization(n: f64, poly: &EnergyPolynomial, epsilon_per_photon: f64) -> Complex64 {
    let s = n.sqrt();
    -(2.0 * poly.c1 * s + 4.0 * poly.c2 * s.powi(3) + 6.0 * poly.c3 * s.powi(5)) / epsilon_per_photon
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Susceptibilities {
    pub chi1: Complex64,
    /// Per (V/m)^2.
    pub chi3: Complex64,
    /// Per (V/m)^4.
    pub chi5: Complex64,
}

impl Susceptibilities {
    /// `P = eps0 (chi1 E + chi3 E^3 + chi5 E^5)` at `E = eps sqrt(n)`.
    pub fn polarization(&self, fq: &FieldQuantization) -> Complex64 {
        let e = fq.e_wp;
        EPSILON_0 * (self.chi1 * e + self.chi3 * e.powi(3) + self.chi5 * e.powi(5))
    }
}

/// Susceptibilities matched term by term against the polarization.
pub fn susceptibilities(poly: &EnergyPolynomial, epsilon_per_photon: f64) -> Susceptibilities {
    let e2 = epsilon_per_photon * epsilon_per_photon;
    Susceptibilities {
        chi1: -2.0 * poly.c1 / (e2 * EPSILON_0),
        chi3: -4.0 * poly.c2 / (e2 * e2 * EPSILON_0),
        chi5: -6.0 * poly.c3 / (e2 * e2 * e2 * EPSILON_0),
    }
}

/// The printed closed forms, evaluated verbatim with `j + m = n` and
/// `j - m = n_e`.
pub fn susceptibilities_printed(params: &HamiltonianParams, fq: &FieldQuantization, n_e: u64) -> Susceptibilities {
    let (n, ne) = (fq.photon_number, n_e as f64);
    let fill = params.filling();
    let col = params.kappa - params.eta;
    let w_half = 0.5 * params.omega_p + params.delta;
    let w_3half = 1.5 * params.omega_p + params.delta;
    let e2 = fq.epsilon_per_photon.powi(2);
    let pre = |k: i32| -HBAR / (e2.powi(k) * EPSILON_0);
    let chi1 = Complex64::new(w_half + w_3half * col * (-0.5 + 2.0 * n), 0.0) - params.k1 * fill
        + params.k2
        + params.k2 * fill * (0.5 * ne * (ne - 1.0) + 0.5 * ne);
    let chi3 = Complex64::new(w_3half * col, 0.0) + 2.0 * params.k1 * fill + 2.0 * params.k2
        + params.k2 * fill * (-1.0 - ne);
    let chi5 = 1.5 * params.k2 * fill;
    Susceptibilities { chi1: chi1 * pre(1), chi3: chi3 * pre(2), chi5: chi5 * pre(3) }
}

/// Undeformed (`kappa = 0`, `1/N = 0`) susceptibilities in closed form.
pub fn undeformed_baseline(params: &HamiltonianParams, epsilon_per_photon: f64) -> Susceptibilities {
    let e2 = epsilon_per_photon * epsilon_per_photon;
    let pre = |k: i32| -HBAR / (e2.powi(k) * EPSILON_0);
    Susceptibilities {
        chi1: (Complex64::new(0.5 * params.omega_p + params.delta, 0.0) + params.k2) * pre(1),
        chi3: 2.0 * params.k2 * pre(2),
        chi5: Complex64::new(0.0, 0.0),
    }
}

/// Which formulas produce the susceptibilities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiPath {
    /// From the fitted energy polynomial.
    #[default]
    Derived,
    /// The printed closed forms.
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiPoint {
    pub delta: f64,
    pub chi1: Complex64,
    pub chi3: Complex64,
    pub chi5: Complex64,
    pub chi_nl: Complex64,
    pub chi_total: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilitySpectrum {
    pub delta_grid: Vec<f64>,
    pub chi1: Vec<Complex64>,
    pub chi3: Vec<Complex64>,
    pub chi5: Vec<Complex64>,
    pub chi_total: Vec<Complex64>,
    pub chi_nl: Vec<Complex64>,
    pub photon_number: f64,
    pub n_atoms: u64,
    pub kappa: f64,
    pub eta: f64,
}

impl SusceptibilitySpectrum {
    pub fn from_points(points: &[ChiPoint], model: &SusceptibilityModel) -> Self {
        Self {
            delta_grid: points.iter().map(|p| p.delta).collect(),
            chi1: points.iter().map(|p| p.chi1).collect(),
            chi3: points.iter().map(|p| p.chi3).collect(),
            chi5: points.iter().map(|p| p.chi5).collect(),
            chi_total: points.iter().map(|p| p.chi_total).collect(),
            chi_nl: points.iter().map(|p| p.chi_nl).collect(),
            photon_number: model.photons,
            n_atoms: model.condensate.n_atoms,
            kappa: model.condensate.kappa,
            eta: model.condensate.eta,
        }
    }

    pub fn len(&self) -> usize {
        self.delta_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_grid.is_empty()
    }
}

/// Everything needed to evaluate the susceptibilities at a detuning.
#[derive(Clone, Debug)]
pub struct SusceptibilityModel {
    pub atoms: AtomicParams,
    pub condensate: CondensateParams,
    pub g1: Complex64,
    pub photons: f64,
    pub n_e: u64,
    pub path: ChiPath,
    pub subtract_offset: bool,
    pub third_order: ThirdOrderSource,
    terms: TermPolynomials,
}

impl SusceptibilityModel {
    pub fn new(atoms: AtomicParams, condensate: CondensateParams, g1: Complex64, photons: f64, n_e: u64) -> Result<Self> {
        atoms.validate()?;
        if !(photons >= 0.0) {
            return Err(Error::invalid("photons", format!("must be >= 0, got {photons}")));
        }
        Ok(Self {
            atoms,
            condensate,
            g1,
            photons,
            n_e,
            path: ChiPath::Derived,
            subtract_offset: false,
            third_order: ThirdOrderSource::ClosedForm,
            terms: TermPolynomials::new(n_e, EnergySource::Analytic)?,
        })
    }

    pub fn with_path(mut self, path: ChiPath) -> Self {
        self.path = path;
        self
    }

    pub fn with_subtract_offset(mut self, on: bool) -> Self {
        self.subtract_offset = on;
        self
    }

    pub fn with_third_order(mut self, source: ThirdOrderSource) -> Self {
        self.third_order = source;
        self
    }

    pub fn with_energy_source(mut self, source: EnergySource) -> Result<Self> {
        self.terms = TermPolynomials::new(self.n_e, source)?;
        Ok(self)
    }

    pub fn with_photons(mut self, photons: f64) -> Self {
        self.photons = photons;
        self
    }

    pub fn terms(&self) -> &TermPolynomials {
        &self.terms
    }

    /// Hamiltonian parameters and field quantization at detuning `delta`.
    pub fn params_at(&self, delta: f64) -> Result<(HamiltonianParams, FieldQuantization)> {
        let v = self.condensate.quant_volume();
        let omega_p = self.atoms.omega_opt - delta;
        let cc = coupling_constants_with(&self.atoms, &self.condensate, delta, self.g1, v, self.third_order)?;
        let hp = HamiltonianParams::from_couplings(omega_p, delta, &cc, &self.condensate);
        Ok((hp, FieldQuantization::new(omega_p, v, self.photons)?))
    }

    pub fn energy_polynomial(&self, delta: f64) -> Result<EnergyPolynomial> {
        Ok(self.terms.combine(&self.params_at(delta)?.0))
    }

    pub fn point(&self, delta: f64) -> Result<ChiPoint> {
        let (hp, fq) = self.params_at(delta)?;
        let mut chi = match self.path {
            ChiPath::Derived => susceptibilities(&self.terms.combine(&hp), fq.epsilon_per_photon),
            ChiPath::Printed => susceptibilities_printed(&hp, &fq, self.n_e),
        };
        if self.subtract_offset {
            // the omega_p/2 part of the first term: -hbar omega_p / (2 eps^2 eps0) = -V
            chi.chi1 += HBAR * 0.5 * hp.omega_p / (fq.epsilon_per_photon.powi(2) * EPSILON_0);
        }
        let e2 = fq.intensity_factor();
        let chi_nl = chi.chi3 * e2 + chi.chi5 * e2 * e2;
        Ok(ChiPoint { delta, chi1: chi.chi1, chi3: chi.chi3, chi5: chi.chi5, chi_nl, chi_total: chi.chi1 + chi_nl })
    }

    pub fn baseline_point(&self, delta: f64) -> Result<ChiPoint> {
        let (hp, fq) = self.params_at(delta)?;
        let mut chi = undeformed_baseline(&hp, fq.epsilon_per_photon);
        if self.subtract_offset {
            chi.chi1 += HBAR * 0.5 * hp.omega_p / (fq.epsilon_per_photon.powi(2) * EPSILON_0);
        }
        let e2 = fq.intensity_factor();
        let chi_nl = chi.chi3 * e2 + chi.chi5 * e2 * e2;
        Ok(ChiPoint { delta, chi1: chi.chi1, chi3: chi.chi3, chi5: chi.chi5, chi_nl, chi_total: chi.chi1 + chi_nl })
    }
}

/// Spectrum over a detuning grid.
pub fn chi_total(delta_grid: &[f64], model: &SusceptibilityModel) -> Result<SusceptibilitySpectrum> {
    if delta_grid.is_empty() {
        return Err(Error::GridTooSmall { got: 0, needed: 1 });
    }
    let points = delta_grid.iter().map(|&d| model.point(d)).collect::<Result<Vec<_>>>()?;
    Ok(SusceptibilitySpectrum::from_points(&points, model))
}

/// Linear map from probe intensity to mean photon number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonCalibration {
    /// Photons per W/m^2.
    pub photons_per_intensity: f64,
}

impl PhotonCalibration {
    /// Anchored so that 80 uW/cm^2 corresponds to 25 photons.
    pub fn sodium() -> Self {
        Self { photons_per_intensity: 25.0 / 0.8 }
    }

    /// Photons in a flat-top pulse of the given beam area (m^2) and
    /// duration (s) at angular frequency `omega`.
    pub fn from_beam(beam_area: f64, duration: f64, omega: f64) -> Result<Self> {
        if !(beam_area > 0.0 && duration > 0.0 && omega > 0.0) {
            return Err(Error::invalid("beam", "area, duration and frequency must be positive"));
        }
        Ok(Self { photons_per_intensity: beam_area * duration / (HBAR * omega) })
    }
}

/// Mean photon number for a probe intensity (W/m^2).
pub fn photon_number_from_intensity(intensity: f64, calibration: &PhotonCalibration) -> Result<f64> {
    if !(intensity >= 0.0) {
        return Err(Error::invalid("intensity", format!("must be >= 0, got {intensity}")));
    }
    Ok(intensity * calibration.photons_per_intensity)
}
