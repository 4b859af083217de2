//! Parameter sweeps over collision rate, atom number and detuning.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ResolvedConfig;
use crate::deformed::CondensateParams;
use crate::dispersion::{classify, group_index, refractive_index, zero_crossings, Propagation};
use crate::error::{Error, Result};
use crate::susceptibility::{ChiPoint, SusceptibilityModel};
use crate::units::angular_to_hz;

/// One grid point. Values are NaN only when `error` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub kappa: f64,
    pub n_atoms: u64,
    pub delta_hz: f64,
    pub chi1_re: f64,
    pub chi1_im: f64,
    pub chinl_re: f64,
    pub chinl_im: f64,
    pub chi_re: f64,
    pub chi_im: f64,
    pub n_group: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Summary of one `(kappa, N)` family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub kappa: f64,
    pub n_atoms: u64,
    pub eta: f64,
    /// Detunings (Hz) where `n_g` changes sign, linearly interpolated.
    pub n_group_zero_crossings_hz: Vec<f64>,
    /// Whether `n_g` takes both signs in the window.
    pub n_group_both_signs: bool,
    pub subluminal: usize,
    pub superluminal: usize,
    pub luminal: usize,
    pub peak_abs_re_chi_nl: f64,
    pub flagged_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub families: Vec<FamilyReport>,
}

pub fn model_for(cfg: &ResolvedConfig, cond: CondensateParams) -> Result<SusceptibilityModel> {
    Ok(SusceptibilityModel::new(cfg.atoms, cond, cfg.g1, cfg.photons, cfg.n_e)?
        .with_path(cfg.path)
        .with_subtract_offset(cfg.subtract_offset)
        .with_third_order(cfg.third_order))
}

/// Evaluates the full grid; records come out kappa outer, atom number
/// middle, detuning inner, whatever the thread schedule.
pub fn run_sweep(cfg: &ResolvedConfig) -> Result<SweepOutput> {
    let families: Vec<(Vec<SweepRecord>, FamilyReport)> = cfg
        .condensates
        .par_iter()
        .map(|&cond| run_family(cfg, cond))
        .collect::<Result<_>>()?;
    let mut records = Vec::with_capacity(cfg.condensates.len() * cfg.delta_grid.len());
    let mut reports = Vec::with_capacity(families.len());
    for (r, f) in families {
        records.extend(r);
        reports.push(f);
    }
    Ok(SweepOutput { records, families: reports })
}

fn run_family(cfg: &ResolvedConfig, cond: CondensateParams) -> Result<(Vec<SweepRecord>, FamilyReport)> {
    let model = model_for(cfg, cond)?;
    let at = |delta: f64, e: Error| Error::AtGridPoint {
        kappa: cond.kappa,
        n_atoms: cond.n_atoms,
        delta,
        source: Box::new(e),
    };
    let points: Vec<ChiPoint> = cfg
        .delta_grid
        .par_iter()
        .map(|&d| model.point(d).map_err(|e| at(d, e)))
        .collect::<Result<_>>()?;
    family_records(cfg, cond, &points)
}

fn family_records(cfg: &ResolvedConfig, cond: CondensateParams, points: &[ChiPoint]) -> Result<(Vec<SweepRecord>, FamilyReport)> {
    // frequency increases opposite to detuning
    let omega: Vec<f64> = points.iter().rev().map(|p| cfg.atoms.omega_opt - p.delta).collect();
    let mut flagged = vec![None; points.len()];
    let n: Vec<_> = points
        .iter()
        .rev()
        .enumerate()
        .map(|(i, p)| match refractive_index(&[p.chi_total]) {
            Ok(v) => v[0],
            Err(e) => {
                flagged[points.len() - 1 - i] = Some(e.to_string());
                num_complex::Complex64::new(f64::NAN, f64::NAN)
            }
        })
        .collect();
    let mut n_group = group_index(&omega, &n)?;
    n_group.reverse();

    let mut records = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let err = flagged[i].clone().or_else(|| (!n_group[i].is_finite()).then(|| "group index undefined next to a branch point".to_string()));
        let nan = err.is_some();
        records.push(SweepRecord {
            kappa: cond.kappa,
            n_atoms: cond.n_atoms,
            delta_hz: angular_to_hz(p.delta),
            chi1_re: p.chi1.re,
            chi1_im: p.chi1.im,
            chinl_re: p.chi_nl.re,
            chinl_im: p.chi_nl.im,
            chi_re: p.chi_total.re,
            chi_im: p.chi_total.im,
            n_group: if nan { f64::NAN } else { n_group[i] },
            error: err,
        });
    }

    let classes = classify(&n_group, cfg.luminal_tol);
    let count = |c: Propagation| classes.iter().zip(&records).filter(|(k, r)| **k == c && r.error.is_none()).count();
    let crossings = zero_crossings(&n_group)
        .into_iter()
        .map(|i| {
            let (a, b) = (n_group[i], n_group[i + 1]);
            let t = a / (a - b);
            records[i].delta_hz + t * (records[i + 1].delta_hz - records[i].delta_hz)
        })
        .collect();
    let finite = || n_group.iter().filter(|g| g.is_finite());
    let report = FamilyReport {
        kappa: cond.kappa,
        n_atoms: cond.n_atoms,
        eta: cond.eta,
        n_group_zero_crossings_hz: crossings,
        n_group_both_signs: finite().any(|&g| g > 0.0) && finite().any(|&g| g < 0.0),
        subluminal: count(Propagation::Subluminal),
        superluminal: count(Propagation::Superluminal),
        luminal: count(Propagation::Luminal),
        peak_abs_re_chi_nl: points.iter().map(|p| p.chi_nl.re.abs()).fold(0.0, f64::max),
        flagged_points: records.iter().filter(|r| r.error.is_some()).count(),
    };
    Ok((records, report))
}
