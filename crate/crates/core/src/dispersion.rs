//! Refractive and group index from a susceptibility, propagation-regime
//! classification, and spectral-domain propagation of a pulse envelope
//! through a slab.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::C_LIGHT;

/// `n = sqrt(1 + chi)` on the principal branch (`Re n >= 0`).
pub fn refractive_index(chi: &[Complex64]) -> Result<Vec<Complex64>> {
    chi.iter()
        .enumerate()
        .map(|(i, c)| {
            let z = 1.0 + c;
            if z == Complex64::new(0.0, 0.0) {
                Err(Error::Branch(i))
            } else {
                Ok(z.sqrt())
            }
        })
        .collect()
}

fn check_grid(omega: &[f64], len: usize) -> Result<()> {
    if omega.len() < 3 {
        return Err(Error::GridTooSmall { got: omega.len(), needed: 3 });
    }
    if len != omega.len() {
        return Err(Error::invalid("n_complex", format!("length {len} differs from grid length {}", omega.len())));
    }
    if let Some(i) = omega.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::GridOrder(i + 1));
    }
    Ok(())
}

/// Second-order derivative on a nonuniform grid: three-point central
/// stencil inside, three-point one-sided stencils at the ends.
fn derivative<T>(x: &[f64], f: &[T]) -> Vec<T>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let n = x.len();
    let stencil = |i0: usize, at: usize| {
        let (x0, x1, x2) = (x[i0], x[i0 + 1], x[i0 + 2]);
        let xa = x[at];
        // derivatives of the Lagrange basis polynomials at xa
        let w0 = ((xa - x1) + (xa - x2)) / ((x0 - x1) * (x0 - x2));
        let w1 = ((xa - x0) + (xa - x2)) / ((x1 - x0) * (x1 - x2));
        let w2 = ((xa - x0) + (xa - x1)) / ((x2 - x0) * (x2 - x1));
        f[i0] * w0 + f[i0 + 1] * w1 + f[i0 + 2] * w2
    };
    (0..n)
        .map(|i| match i {
            0 => stencil(0, 0),
            i if i == n - 1 => stencil(n - 3, n - 1),
            i => stencil(i - 1, i),
        })
        .collect()
}

/// `n_g = Re n + omega d(Re n)/d omega` by finite differences.
pub fn group_index(omega: &[f64], n_complex: &[Complex64]) -> Result<Vec<f64>> {
    check_grid(omega, n_complex.len())?;
    let re: Vec<f64> = n_complex.iter().map(|z| z.re).collect();
    let d = derivative(omega, &re);
    Ok(re.iter().zip(&d).zip(omega).map(|((n, dn), w)| n + w * dn).collect())
}

/// Complex `n + omega dn/d omega`, for diagnostics.
pub fn group_index_complex(omega: &[f64], n_complex: &[Complex64]) -> Result<Vec<Complex64>> {
    check_grid(omega, n_complex.len())?;
    let d = derivative(omega, n_complex);
    Ok(n_complex.iter().zip(&d).zip(omega).map(|((n, dn), w)| n + dn * *w).collect())
}

/// Group index from a closed-form susceptibility and its derivative:
/// `dn/d omega = chi' / (2 n)`.
pub fn group_index_analytic(omega: f64, chi: Complex64, dchi: Complex64) -> Result<f64> {
    let n = refractive_index(&[chi])?[0];
    Ok((n + omega * dchi / (2.0 * n)).re)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    Subluminal,
    Superluminal,
    Luminal,
}

/// Default width of the luminal band around `n_g = 1` and `n_g = 0`.
pub const LUMINAL_TOL: f64 = 1e-9;

/// `n_g > 1 + tol`: subluminal; within `tol` of 1 or of 0: luminal;
/// otherwise (below 1, including negative) superluminal.
pub fn classify(n_group: &[f64], tol: f64) -> Vec<Propagation> {
    n_group
        .iter()
        .map(|&g| {
            if (g - 1.0).abs() <= tol || g.abs() <= tol {
                Propagation::Luminal
            } else if g > 1.0 {
                Propagation::Subluminal
            } else {
                Propagation::Superluminal
            }
        })
        .collect()
}

/// `c / n_g`, signed; infinite at `n_g = 0`.
pub fn v_group(n_group: &[f64]) -> Vec<f64> {
    n_group.iter().map(|g| C_LIGHT / g).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionResult {
    pub omega_grid: Vec<f64>,
    pub n_complex: Vec<Complex64>,
    pub n_group: Vec<f64>,
    pub v_group: Vec<f64>,
    pub classification: Vec<Propagation>,
}

impl DispersionResult {
    pub fn from_chi(omega: &[f64], chi: &[Complex64], tol: f64) -> Result<Self> {
        let n_complex = refractive_index(chi)?;
        let n_group = group_index(omega, &n_complex)?;
        Ok(Self {
            omega_grid: omega.to_vec(),
            v_group: v_group(&n_group),
            classification: classify(&n_group, tol),
            n_complex,
            n_group,
        })
    }

    /// From a detuning grid with `omega = omega_opt - delta`; the grid is
    /// reversed so that `omega` increases. Results are returned in the
    /// original detuning order.
    pub fn from_detuning(omega_opt: f64, delta: &[f64], chi: &[Complex64], tol: f64) -> Result<Self> {
        if delta.len() != chi.len() {
            return Err(Error::invalid("chi", "length differs from the detuning grid"));
        }
        let omega: Vec<f64> = delta.iter().rev().map(|d| omega_opt - d).collect();
        let chi_rev: Vec<Complex64> = chi.iter().rev().copied().collect();
        let mut r = Self::from_chi(&omega, &chi_rev, tol)?;
        r.omega_grid.reverse();
        r.n_complex.reverse();
        r.n_group.reverse();
        r.v_group.reverse();
        r.classification.reverse();
        Ok(r)
    }
}

/// Indices `i` where `n_g` changes sign between `i` and `i + 1`.
pub fn zero_crossings(n_group: &[f64]) -> Vec<usize> {
    n_group
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].is_finite() && w[1].is_finite() && (w[0] < 0.0) != (w[1] < 0.0))
        .map(|(i, _)| i)
        .collect()
}

/// Susceptibility as a function of angular frequency over a finite band.
pub trait ChiProfile {
    fn chi(&self, omega: f64) -> Complex64;
    /// `(lowest, highest)` frequency where the profile is defined.
    fn span(&self) -> (f64, f64);
}

/// Linear interpolation on a sampled grid; zero outside it.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledChi {
    omega: Vec<f64>,
    chi: Vec<Complex64>,
}

impl SampledChi {
    pub fn new(omega: Vec<f64>, chi: Vec<Complex64>) -> Result<Self> {
        check_grid(&omega, chi.len())?;
        Ok(Self { omega, chi })
    }

    /// From a detuning grid with `omega = omega_opt - delta`.
    pub fn from_detuning(omega_opt: f64, delta: &[f64], chi: &[Complex64]) -> Result<Self> {
        Self::new(delta.iter().rev().map(|d| omega_opt - d).collect(), chi.iter().rev().copied().collect())
    }
}

impl ChiProfile for SampledChi {
    fn chi(&self, w: f64) -> Complex64 {
        let (lo, hi) = self.span();
        if !(w >= lo && w <= hi) {
            return Complex64::new(0.0, 0.0);
        }
        let i = self.omega.partition_point(|&x| x <= w).clamp(1, self.omega.len() - 1);
        let (x0, x1) = (self.omega[i - 1], self.omega[i]);
        let t = (w - x0) / (x1 - x0);
        self.chi[i - 1] * (1.0 - t) + self.chi[i] * t
    }

    fn span(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }
}

/// Closed-form profile on a declared band.
pub struct FnChi<F: Fn(f64) -> Complex64> {
    pub f: F,
    pub lo: f64,
    pub hi: f64,
}

impl<F: Fn(f64) -> Complex64> ChiProfile for FnChi<F> {
    fn chi(&self, omega: f64) -> Complex64 {
        (self.f)(omega)
    }

    fn span(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// Group index of a profile at one frequency by a five-point central
/// difference with step `h`.
pub fn group_index_at(profile: &dyn ChiProfile, omega: f64, h: f64) -> Result<f64> {
    let n = |w: f64| -> Result<f64> { Ok(refractive_index(&[profile.chi(w)])?[0].re) };
    let dn = (8.0 * (n(omega + h)? - n(omega - h)?) - (n(omega + 2.0 * h)? - n(omega - 2.0 * h)?)) / (12.0 * h);
    Ok(n(omega)? + omega * dn)
}

/// Complex envelope sampled at uniform time steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub dt: f64,
    pub samples: Vec<Complex64>,
}

impl Envelope {
    /// Gaussian intensity profile of the given FWHM (s), centred in a window
    /// of `len` samples.
    pub fn gaussian(fwhm: f64, dt: f64, len: usize) -> Self {
        let sigma_i = fwhm / (2.0 * (2.0f64.ln()).sqrt());
        // |E|^2 ~ exp(-t^2 / sigma_i^2); field width is sqrt(2) larger
        let centre = (len / 2) as f64 * dt;
        let samples = (0..len)
            .map(|k| {
                let t = k as f64 * dt - centre;
                Complex64::new((-0.5 * t * t / (sigma_i * sigma_i)).exp(), 0.0)
            })
            .collect();
        Self { dt, samples }
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dt
    }

    /// Position of the intensity peak (s), refined by a parabola through the
    /// discrete maximum and its neighbours.
    pub fn peak_time(&self) -> f64 {
        let p: Vec<f64> = self.samples.iter().map(|z| z.norm_sqr()).collect();
        let n = p.len();
        let k = (0..n).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap_or(0);
        let (ym, y0, yp) = (p[(k + n - 1) % n], p[k], p[(k + 1) % n]);
        let den = ym - 2.0 * y0 + yp;
        let shift = if den != 0.0 { 0.5 * (ym - yp) / den } else { 0.0 };
        (k as f64 + shift.clamp(-0.5, 0.5)) * self.dt
    }

    pub fn window(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseRun {
    pub carrier: f64,
    pub input: Envelope,
    pub output: Envelope,
    pub slab_length: f64,
    /// Output peak minus input peak (s).
    pub measured_delay: f64,
    /// `L / c` (s).
    pub vacuum_time: f64,
    /// `(n_g(carrier) - 1) L / c` (s).
    pub predicted_delay: f64,
    pub n_group_carrier: f64,
    /// Frequency band holding 99.99 % of the input energy (rad/s).
    pub bandwidth: f64,
}

impl PulseRun {
    /// Measured delay relative to vacuum propagation.
    pub fn excess_delay(&self) -> f64 {
        self.measured_delay - self.vacuum_time
    }
}

/// Propagates an envelope on `carrier` through a slab of length `l` by
/// multiplying each frequency component with `exp(i n(omega) omega L / c)`.
///
/// Field convention `E(t) exp(-i omega t)`; the envelope spectrum must fit in
/// a third of the profile's band.
pub fn propagate_pulse(profile: &dyn ChiProfile, carrier: f64, envelope: &Envelope, l: f64) -> Result<PulseRun> {
    if !(l > 0.0) {
        return Err(Error::invalid("slab_length", format!("must be positive, got {l}")));
    }
    let len = envelope.samples.len();
    if len < 8 {
        return Err(Error::GridTooSmall { got: len, needed: 8 });
    }
    if !(envelope.dt > 0.0) {
        return Err(Error::invalid("dt", "must be positive"));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);

    // spectrum of E(t) = sum_k S_k exp(-i W_k t)
    let mut spec = envelope.samples.clone();
    inv.process(&mut spec);
    let dw = 2.0 * std::f64::consts::PI / (len as f64 * envelope.dt);
    let offset = |k: usize| if k <= len / 2 { k as f64 * dw } else { (k as f64 - len as f64) * dw };

    let bandwidth = energy_band(&spec, &offset);
    let (lo, hi) = profile.span();
    let span = hi - lo;
    if bandwidth > span / 3.0 || carrier - 0.5 * bandwidth < lo || carrier + 0.5 * bandwidth > hi {
        return Err(Error::BandwidthExceedsGrid { bandwidth, span });
    }

    let k_carrier = {
        let n = refractive_index(&[profile.chi(carrier)])?[0];
        n * carrier / C_LIGHT
    };
    for (k, s) in spec.iter_mut().enumerate() {
        let w = carrier + offset(k);
        let n = refractive_index(&[profile.chi(w)])?[0];
        // the carrier phase is common to every component and dropped
        let phase = (n * w / C_LIGHT - k_carrier) * l;
        *s *= (Complex64::i() * phase).exp();
    }
    let k0 = k_carrier * l;
    fwd.process(&mut spec);
    let scale = (Complex64::i() * k0).exp() / len as f64;
    let output = Envelope { dt: envelope.dt, samples: spec.into_iter().map(|z| z * scale).collect() };

    let window = envelope.window();
    let mut measured = output.peak_time() - envelope.peak_time();
    measured -= (measured / window).round() * window;
    let h = (span * 1e-6).max(carrier * 1e-15);
    let n_g = group_index_at(profile, carrier, h)?;
    Ok(PulseRun {
        carrier,
        input: envelope.clone(),
        output,
        slab_length: l,
        measured_delay: measured,
        vacuum_time: l / C_LIGHT,
        predicted_delay: (n_g - 1.0) * l / C_LIGHT,
        n_group_carrier: n_g,
        bandwidth,
    })
}

/// Width of the central band holding all but 1e-4 of the spectral energy.
fn energy_band(spec: &[Complex64], offset: &dyn Fn(usize) -> f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = spec.iter().enumerate().map(|(k, z)| (offset(k), z.norm_sqr())).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pts.iter().map(|p| p.1).sum();
    if total == 0.0 {
        return 0.0;
    }
    let tail = 0.5e-4 * total;
    let mut acc = 0.0;
    let mut lo = pts[0].0;
    for p in &pts {
        acc += p.1;
        if acc > tail {
            lo = p.0;
            break;
        }
    }
    acc = 0.0;
    let mut hi = pts[pts.len() - 1].0;
    for p in pts.iter().rev() {
        acc += p.1;
        if acc > tail {
            hi = p.0;
            break;
        }
    }
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn index_special_values() {
        let n = refractive_index(&[c(0.0, 0.0), c(3.0, 0.0), c(-2.0, 0.0), c(-5.0, -1e-3)]).unwrap();
        assert_eq!(n[0], c(1.0, 0.0));
        assert_eq!(n[1], c(2.0, 0.0));
        assert!(n.iter().all(|z| z.re >= 0.0));
        assert!(matches!(refractive_index(&[c(0.1, 0.0), c(-1.0, 0.0)]), Err(Error::Branch(1))));
        let chi = c(6e-4, -8e-4);
        let n = refractive_index(&[chi]).unwrap()[0];
        assert!((n - (1.0 + chi / 2.0)).norm() < 1e-6);
    }

    #[test]
    fn group_index_simple_profiles() {
        let omega: Vec<f64> = vec![1.0, 1.3, 1.35, 2.0, 2.2, 3.0];
        let flat = vec![c(1.7, 0.1); omega.len()];
        for g in group_index(&omega, &flat).unwrap() {
            assert_relative_eq!(g, 1.7, max_relative = 1e-14);
        }
        let s = 0.25;
        let lin: Vec<Complex64> = omega.iter().map(|w| c(1.0 + s * w, 0.0)).collect();
        for (g, w) in group_index(&omega, &lin).unwrap().iter().zip(&omega) {
            assert_relative_eq!(*g, 1.0 + 2.0 * s * w, max_relative = 1e-13);
        }
        assert!(matches!(group_index(&omega[..2], &lin[..2]), Err(Error::GridTooSmall { .. })));
        assert!(matches!(group_index(&[1.0, 3.0, 2.0], &lin[..3]), Err(Error::GridOrder(2))));
    }

    #[test]
    fn lorentzian_finite_difference() {
        let (w0, g, a) = (1.0e6, 2.0e3, 40.0);
        let chi = |w: f64| a / c(w0 - w, -g);
        let dchi = |w: f64| a / (c(w0 - w, -g) * c(w0 - w, -g));
        let omega: Vec<f64> = (0..=40000).map(|i| w0 - 1e4 + 0.5 * i as f64).collect();
        let ch: Vec<Complex64> = omega.iter().map(|&w| chi(w)).collect();
        let n = refractive_index(&ch).unwrap();
        let fd = group_index(&omega, &n).unwrap();
        for i in 1..omega.len() - 1 {
            let an = group_index_analytic(omega[i], chi(omega[i]), dchi(omega[i])).unwrap();
            assert!((fd[i] - an).abs() <= 1e-6 * an.abs().max(1.0), "i={i} {} vs {an}", fd[i]);
        }
    }

    #[test]
    fn classification_bands() {
        let r = classify(&[17e6, 1.0, -5.0, 0.5, 1.0 + 1e-12, 0.0, 1.5], 1e-9);
        use Propagation::*;
        assert_eq!(r, vec![Subluminal, Luminal, Superluminal, Superluminal, Luminal, Luminal, Subluminal]);
        assert!(v_group(&[-5.0])[0] < 0.0);
    }

    #[test]
    fn crossings() {
        assert_eq!(zero_crossings(&[1.0, 0.5, -0.2, -3.0, 2.0]), vec![1, 3]);
        assert!(zero_crossings(&[1.0, 2.0]).is_empty());
    }

    #[test]
    fn sampled_interpolation() {
        let s = SampledChi::new(vec![0.0, 1.0, 3.0], vec![c(0.0, 0.0), c(1.0, 2.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(s.chi(0.5), c(0.5, 1.0));
        assert_eq!(s.chi(2.0), c(2.0, 1.0));
        assert_eq!(s.chi(3.0), c(3.0, 0.0));
        assert_eq!(s.chi(-1.0), c(0.0, 0.0));
        let d = SampledChi::from_detuning(10.0, &[-1.0, 0.0, 2.0], &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(d.span(), (8.0, 11.0));
        assert_eq!(d.chi(11.0), c(1.0, 0.0));
    }

    #[test]
    fn detuning_order_preserved() {
        let delta = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let chi: Vec<Complex64> = delta.iter().map(|d| c(0.01 * d, 0.0)).collect();
        let r = DispersionResult::from_detuning(100.0, &delta, &chi, 1e-9).unwrap();
        assert_eq!(r.omega_grid, vec![102.0, 101.0, 100.0, 99.0, 98.0]);
        // n rises with detuning, so falls with frequency: anomalous
        assert!(r.n_group[2] < 1.0);
    }

    #[test]
    fn vacuum_and_flat_slab() {
        let carrier = 2.0e15;
        let env = Envelope::gaussian(1e-12, 2e-14, 1024);
        let vac = FnChi { f: |_| c(0.0, 0.0), lo: carrier - 1e15, hi: carrier + 1e15 };
        let l = 1e-4;
        let run = propagate_pulse(&vac, carrier, &env, l).unwrap();
        assert!((run.measured_delay - l / C_LIGHT).abs() <= env.dt);
        assert_relative_eq!(run.output.energy(), env.energy(), max_relative = 1e-12);

        let n0: f64 = 1.5;
        let flat = FnChi { f: |_| c(n0 * n0 - 1.0, 0.0), lo: carrier - 1e15, hi: carrier + 1e15 };
        let run = propagate_pulse(&flat, carrier, &env, l).unwrap();
        assert!((run.excess_delay() - (n0 - 1.0) * l / C_LIGHT).abs() <= 1e-3 * (n0 - 1.0) * l / C_LIGHT);
        assert_relative_eq!(run.predicted_delay, (n0 - 1.0) * l / C_LIGHT, max_relative = 1e-6);
    }

    #[test]
    fn too_wide_pulse_rejected() {
        let env = Envelope::gaussian(1e-12, 2e-14, 512);
        let narrow = FnChi { f: |_| c(0.0, 0.0), lo: 1e15 - 1e12, hi: 1e15 + 1e12 };
        assert!(matches!(propagate_pulse(&narrow, 1e15, &env, 1e-3), Err(Error::BandwidthExceedsGrid { .. })));
        let wide = FnChi { f: |_| c(0.0, 0.0), lo: 0.0, hi: 2e15 };
        assert!(propagate_pulse(&wide, 1e15, &env, 0.0).is_err());
    }
}
