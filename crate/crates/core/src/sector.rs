//! Photon-exciton Hamiltonian on a fixed-excitation sector, its Schwinger
//! angular-momentum form, and first-order energies in the rotated frame.
//!
//! Mode `a` is the probe photon, mode `b` the exciton. A sector with `n_exc`
//! excitations has basis `|n, n_e>` with `n + n_e = n_exc`, stored in order of
//! increasing photon number, so basis index `k` carries `m = k - j` with
//! `j = n_exc / 2`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::deformed::{CondensateParams, OperatorMatrix};
use crate::error::{Error, Result};
use crate::lambda::CouplingConstants;
use crate::units::HBAR;

#[cfg(test)]
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationSector {
    pub n_exc: u64,
    pub j: f64,
    /// `(n, n_e)` pairs, photon number ascending.
    pub basis: Vec<(u64, u64)>,
}

impl ExcitationSector {
    pub fn new(n_exc: u64) -> Self {
        let basis = (0..=n_exc).map(|n| (n, n_exc - n)).collect();
        Self { n_exc, j: n_exc as f64 / 2.0, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `m` of basis state `k`.
    pub fn m(&self, k: usize) -> f64 {
        k as f64 - self.j
    }

    /// Basis index of `m`, if `m` is one of `-j..=j`.
    pub fn index_of(&self, m: f64) -> Option<usize> {
        let k = m + self.j;
        let kr = k.round();
        ((k - kr).abs() < 1e-9 && kr >= 0.0 && kr <= self.n_exc as f64).then_some(kr as usize)
    }

    fn label(&self) -> String {
        format!("sector n_exc={}", self.n_exc)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngularOps {
    pub jx: OperatorMatrix,
    pub jy: OperatorMatrix,
    pub jz: OperatorMatrix,
    pub jplus: OperatorMatrix,
    pub jminus: OperatorMatrix,
}

impl AngularOps {
    /// `Jx^2 + Jy^2 + Jz^2`.
    pub fn casimir(&self) -> DMatrix<Complex64> {
        &self.jx.data * &self.jx.data + &self.jy.data * &self.jy.data + &self.jz.data * &self.jz.data
    }
}

/// Two-mode ladder operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ladder {
    A,
    Ad,
    B,
    Bd,
}

/// Product of ladder operators, written left to right as in the formula and
/// applied to kets right to left.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpString(pub &'static [Ladder]);

impl OpString {
    /// Image of `|n, n_e>`: amplitude and target state, or `None` if
    /// annihilated.
    pub fn apply(&self, (n, ne): (u64, u64)) -> Option<(f64, (u64, u64))> {
        let (mut n, mut ne) = (n, ne);
        let mut amp = 1.0;
        for op in self.0.iter().rev() {
            match op {
                Ladder::A => {
                    if n == 0 {
                        return None;
                    }
                    amp *= (n as f64).sqrt();
                    n -= 1;
                }
                Ladder::Ad => {
                    n += 1;
                    amp *= (n as f64).sqrt();
                }
                Ladder::B => {
                    if ne == 0 {
                        return None;
                    }
                    amp *= (ne as f64).sqrt();
                    ne -= 1;
                }
                Ladder::Bd => {
                    ne += 1;
                    amp *= (ne as f64).sqrt();
                }
            }
        }
        Some((amp, (n, ne)))
    }

    /// Matrix on the sector; every string used here conserves `n + n_e`.
    pub fn matrix(&self, sector: &ExcitationSector) -> DMatrix<Complex64> {
        let dim = sector.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (col, &ket) in sector.basis.iter().enumerate() {
            if let Some((amp, (n, ne))) = self.apply(ket) {
                debug_assert_eq!(n + ne, sector.n_exc, "string leaves the sector");
                m[(n as usize, col)] += Complex64::new(amp, 0.0);
            }
        }
        m
    }
}

use Ladder::{Ad, Bd, A, B};

/// Operator content of the five perturbation terms.
pub const HPRIME_STRINGS: [&[OpString]; 5] = [
    &[OpString(&[Bd, B])],
    &[OpString(&[Bd, Bd, B, B])],
    &[OpString(&[A, Bd, Bd, B]), OpString(&[Ad, Bd, B, B])],
    &[OpString(&[A, Ad, A, Bd]), OpString(&[Ad, A, Ad, B])],
    &[OpString(&[A, Ad, A, Bd, Bd, B]), OpString(&[Ad, A, Ad, Bd, B, B])],
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    /// Probe frequency (rad/s).
    pub omega_p: f64,
    /// Detuning (rad/s).
    pub delta: f64,
    /// Collective linear coupling (rad/s).
    pub k1: Complex64,
    /// Collective nonlinear coupling (rad/s).
    pub k2: Complex64,
    /// Collision rate (s^-1, used as a pure number).
    pub kappa: f64,
    /// `1 / N`.
    pub eta: f64,
}

impl HamiltonianParams {
    pub fn from_couplings(omega_p: f64, delta: f64, couplings: &CouplingConstants, cond: &CondensateParams) -> Self {
        Self {
            omega_p,
            delta,
            k1: couplings.big_k1,
            k2: couplings.big_k2,
            kappa: cond.kappa,
            eta: cond.eta,
        }
    }

    /// `kappa/2 - 1/(2N)`.
    pub fn filling(&self) -> f64 {
        0.5 * (self.kappa - self.eta)
    }

    /// Coefficients (rad/s) multiplying the operator content of each term in
    /// [`HPRIME_STRINGS`].
    pub fn term_coefficients(&self) -> [Complex64; 5] {
        let fill = self.filling();
        [
            Complex64::new(0.5 * self.omega_p + self.delta, 0.0),
            Complex64::new((1.5 * self.omega_p + self.delta) * (self.kappa - self.eta), 0.0),
            self.k1 * fill,
            self.k2,
            self.k2 * fill,
        ]
    }
}

pub fn sector_with_ops(n_exc: u64) -> (ExcitationSector, AngularOps) {
    let sector = ExcitationSector::new(n_exc);
    let label = sector.label();
    let jplus = OpString(&[Ad, B]).matrix(&sector);
    let jminus = OpString(&[A, Bd]).matrix(&sector);
    let na = OpString(&[Ad, A]).matrix(&sector);
    let nb = OpString(&[Bd, B]).matrix(&sector);
    let jz = (na - nb) * Complex64::new(0.5, 0.0);
    let jx = (&jplus + &jminus) * Complex64::new(0.5, 0.0);
    let jy = (&jplus - &jminus) * Complex64::new(0.0, -0.5);
    let op = |m: DMatrix<Complex64>| OperatorMatrix::new(m, label.clone());
    let ops = AngularOps { jx: op(jx), jy: op(jy), jz: op(jz), jplus: op(jplus), jminus: op(jminus) };
    (sector, ops)
}

/// `hbar omega_p n_exc + 2 hbar K1 Jx` (J).
pub fn build_h0(sector: &ExcitationSector, params: &HamiltonianParams) -> OperatorMatrix {
    let (_, ops) = sector_with_ops(sector.n_exc);
    let dim = sector.dim();
    let diag = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(HBAR * params.omega_p * sector.n_exc as f64, 0.0);
    OperatorMatrix::new(diag + ops.jx.data * (2.0 * HBAR * params.k1), sector.label())
}

/// Perturbation on the sector (J), strings evaluated literally.
pub fn build_hprime(sector: &ExcitationSector, params: &HamiltonianParams) -> OperatorMatrix {
    let dim = sector.dim();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for (coef, strings) in params.term_coefficients().iter().zip(HPRIME_STRINGS) {
        for s in strings {
            h += s.matrix(sector) * (coef * HBAR);
        }
    }
    OperatorMatrix::new(h, sector.label())
}

/// `E0_jm = hbar omega_p n_exc + 2 hbar K1 m` (J).
pub fn unperturbed_energy(n_exc: u64, m: f64, params: &HamiltonianParams) -> Complex64 {
    Complex64::new(HBAR * params.omega_p * n_exc as f64, 0.0) + 2.0 * HBAR * m * params.k1
}

/// Sector with the rotation to the `Jx` eigenbasis and the rotated diagonals
/// of each perturbation term's operator content. All of it is independent of
/// the physical parameters, so one instance serves any parameter set.
#[derive(Clone, Debug)]
pub struct RotatedSector {
    pub sector: ExcitationSector,
    pub ops: AngularOps,
    /// `exp(i theta Jy)` with `R Jz R^-1 = Jx`.
    pub rotation: DMatrix<Complex64>,
    pub theta: f64,
    /// Unrotated matrices of each term's operator content.
    term_matrices: Vec<DMatrix<Complex64>>,
    /// Diagonals of `R^-1 T R` per term.
    term_diagonals: Vec<Vec<Complex64>>,
}

impl RotatedSector {
    pub fn new(n_exc: u64) -> Result<Self> {
        let (sector, ops) = sector_with_ops(n_exc);
        let (theta, rotation) = rotation_to_jx(&ops)?;
        let rot_inv = rotation.adjoint();
        let mut term_matrices = Vec::with_capacity(5);
        let mut term_diagonals = Vec::with_capacity(5);
        for strings in HPRIME_STRINGS {
            let mut t = DMatrix::<Complex64>::zeros(sector.dim(), sector.dim());
            for s in strings {
                t += s.matrix(&sector);
            }
            let rotated = &rot_inv * &t * &rotation;
            term_diagonals.push(rotated.diagonal().iter().copied().collect());
            term_matrices.push(t);
        }
        Ok(Self { sector, ops, rotation, theta, term_matrices, term_diagonals })
    }

    /// `<jm| R^-1 T R |jm>` for term `t` with unit coefficient.
    pub fn term_diagonal(&self, t: usize, k: usize) -> Complex64 {
        self.term_diagonals[t][k]
    }

    /// First-order shift `<jm| R^-1 H' R |jm>` (J).
    pub fn first_order_shift(&self, params: &HamiltonianParams, m: f64) -> Result<Complex64> {
        let k = self.index(m)?;
        Ok(params
            .term_coefficients()
            .iter()
            .enumerate()
            .map(|(t, c)| c * self.term_diagonals[t][k])
            .sum::<Complex64>()
            * HBAR)
    }

    /// Full matrix `R^-1 H' R` (J).
    pub fn rotated_hprime(&self, params: &HamiltonianParams) -> DMatrix<Complex64> {
        let mut h = DMatrix::<Complex64>::zeros(self.sector.dim(), self.sector.dim());
        for (c, t) in params.term_coefficients().iter().zip(&self.term_matrices) {
            h += t * (c * HBAR);
        }
        self.rotation.adjoint() * h * &self.rotation
    }

    /// Whether first-order theory is trustworthy: largest off-diagonal of the
    /// rotated perturbation below a tenth of the smallest unperturbed gap.
    /// Logs a warning otherwise.
    pub fn check_validity(&self, params: &HamiltonianParams) -> bool {
        if self.sector.dim() < 2 {
            return true;
        }
        let h = self.rotated_hprime(params);
        let mut off = 0.0f64;
        for r in 0..h.nrows() {
            for c in 0..h.ncols() {
                if r != c {
                    off = off.max(h[(r, c)].norm());
                }
            }
        }
        let gap = 2.0 * HBAR * params.k1.norm();
        let ok = off < 0.1 * gap;
        if !ok {
            log::warn!(
                "n_exc={}: rotated off-diagonal {off:e} J is not small against the level gap {gap:e} J",
                self.sector.n_exc
            );
        }
        ok
    }

    fn index(&self, m: f64) -> Result<usize> {
        self.sector.index_of(m).ok_or_else(|| {
            Error::invalid("m", format!("{m} is not in -j..=j for j = {}", self.sector.j))
        })
    }
}

/// Finds `theta` in `{+pi/2, -pi/2}` with `exp(i theta Jy) Jz exp(-i theta Jy) = Jx`.
fn rotation_to_jx(ops: &AngularOps) -> Result<(f64, DMatrix<Complex64>)> {
    let dim = ops.jz.dim();
    if dim == 1 {
        return Ok((FRAC_PI_2, DMatrix::identity(1, 1)));
    }
    let mut best = (f64::INFINITY, 0.0, DMatrix::zeros(dim, dim));
    for theta in [FRAC_PI_2, -FRAC_PI_2] {
        let r = (&ops.jy.data * Complex64::new(0.0, theta)).exp();
        let image = &r * &ops.jz.data * r.adjoint();
        let resid = (&image - &ops.jx.data).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if resid < best.0 {
            best = (resid, theta, r);
        }
    }
    let scale = ops.jz.data.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if best.0 > 1e-10 * scale {
        return Err(Error::Domain {
            function: "rotation_to_jx",
            reason: format!("no quarter-turn maps Jz to Jx (residual {:e})", best.0),
        });
    }
    Ok((best.1, best.2))
}

/// `E_jm` to first order (J), via a fresh rotated sector.
pub fn rotated_first_order_energy(sector: &ExcitationSector, params: &HamiltonianParams, m: f64) -> Result<Complex64> {
    let rs = RotatedSector::new(sector.n_exc)?;
    rs.check_validity(params);
    Ok(unperturbed_energy(sector.n_exc, m, params) + rs.first_order_shift(params, m)?)
}

/// Closed-form rotated diagonal of term `t` with unit coefficient, in terms
/// of `p = j + m` and `q = j - m`.
pub fn term_diagonal_analytic(t: usize, p: f64, q: f64) -> f64 {
    match t {
        0 => 0.5 * p + 0.5 * q,
        1 => 0.25 * q * (q - 1.0) + 0.25 * p * (p - 1.0) + p * q,
        2 => 0.5 * p * (p - 1.0) - 0.5 * q * (q - 1.0),
        3 => 0.5 * p - 0.5 * q + 0.5 * p * p - 0.5 * q * q,
        4 => {
            0.5 * p * (p - 1.0) - 0.5 * q * (q - 1.0) + 0.25 * p * (p - 1.0) * (p - 2.0)
                - 0.25 * q * (q - 1.0) * (q - 2.0)
                - 0.25 * p * q * (p - 1.0)
                + 0.25 * p * q * (q - 1.0)
        }
        _ => panic!("no perturbation term {t}"),
    }
}

/// The same polynomials exactly as printed in the source derivation, kept for
/// the errata comparison. Terms 2 and 4 differ from [`term_diagonal_analytic`].
pub fn term_diagonal_printed(t: usize, p: f64, q: f64) -> f64 {
    match t {
        2 => 0.5 * q * (q - 1.0) + 0.5 * p * (p - 1.0),
        4 => {
            // contains the self-cancelling pair
            0.5 * p * (p - 1.0) - 0.5 * p * (p - 1.0) + 0.25 * p * (p - 1.0) * (p - 2.0)
                - 0.25 * q * (q - 1.0) * (q - 2.0)
                - 0.25 * p * q * (p - 1.0)
                + 0.25 * p * q * (q - 1.0)
        }
        _ => term_diagonal_analytic(t, p, q),
    }
}

fn check_jm(j: f64, m: f64) -> Result<()> {
    let twice_j = 2.0 * j;
    let ok = j >= 0.0
        && (twice_j - twice_j.round()).abs() < 1e-9
        && m.abs() <= j + 1e-9
        && ((j + m) - (j + m).round()).abs() < 1e-9;
    if ok {
        Ok(())
    } else {
        Err(Error::invalid("m", format!("need |m| <= j with j + m integral, got j = {j}, m = {m}")))
    }
}

/// First-order shift `<jm| R^-1 H' R |jm>` in closed form (J).
pub fn matrix_element_analytic(j: f64, m: f64, params: &HamiltonianParams) -> Result<Complex64> {
    matrix_element_with(j, m, params, term_diagonal_analytic)
}

/// As [`matrix_element_analytic`] with the printed polynomials.
pub fn matrix_element_printed(j: f64, m: f64, params: &HamiltonianParams) -> Result<Complex64> {
    matrix_element_with(j, m, params, term_diagonal_printed)
}

fn matrix_element_with(j: f64, m: f64, params: &HamiltonianParams, poly: fn(usize, f64, f64) -> f64) -> Result<Complex64> {
    check_jm(j, m)?;
    let (p, q) = ((j + m).round(), (j - m).round());
    Ok(params
        .term_coefficients()
        .iter()
        .enumerate()
        .map(|(t, c)| c * poly(t, p, q))
        .sum::<Complex64>()
        * HBAR)
}

/// Scale for relative comparisons of first-order shifts: the sum of term
/// magnitudes, so cancellation between large terms does not inflate errors.
pub fn shift_scale(j: f64, m: f64, params: &HamiltonianParams) -> f64 {
    let (p, q) = ((j + m).round(), (j - m).round());
    params
        .term_coefficients()
        .iter()
        .enumerate()
        .map(|(t, c)| c.norm() * (1.0 + p + q).powi(if t == 4 { 3 } else { 2 }))
        .sum::<f64>()
        * HBAR
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> HamiltonianParams {
        HamiltonianParams {
            omega_p: 3.2e3,
            delta: -47.0,
            k1: Complex64::new(12.5, 0.0),
            k2: Complex64::new(-0.8, 0.0),
            kappa: 0.3,
            eta: 0.01,
        }
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let (s, ops) = sector_with_ops(1);
        assert_eq!(s.dim(), 2);
        let h = Complex64::new(0.5, 0.0);
        let sx = DMatrix::from_row_slice(2, 2, &[ZERO, h, h, ZERO]);
        let sy = DMatrix::from_row_slice(2, 2, &[ZERO, Complex64::new(0.0, 0.5), Complex64::new(0.0, -0.5), ZERO]);
        let sz = DMatrix::from_row_slice(2, 2, &[-h, ZERO, ZERO, h]);
        // basis (0,1), (1,0): m = -1/2, +1/2
        assert!((ops.jx.data - sx).norm() < 1e-15);
        assert!((ops.jy.data - sy).norm() < 1e-15);
        assert!((ops.jz.data - sz).norm() < 1e-15);
    }

    #[test]
    fn casimir_and_commutators() {
        for n in [1u64, 2, 4, 7, 30] {
            let (s, ops) = sector_with_ops(n);
            let j = s.j;
            let id = DMatrix::<Complex64>::identity(s.dim(), s.dim()) * Complex64::new(j * (j + 1.0), 0.0);
            assert!((ops.casimir() - id).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12 * (1.0 + j * j));
            let i = Complex64::new(0.0, 1.0);
            let c = ops.jx.commutator(&ops.jy).data - &ops.jz.data * i;
            assert!(c.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12 * (1.0 + j));
            let c = ops.jy.commutator(&ops.jz).data - &ops.jx.data * i;
            assert!(c.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12 * (1.0 + j));
            for k in 0..s.dim() {
                assert_relative_eq!(ops.jz.data[(k, k)].re, s.m(k), epsilon = 1e-12);
                let (n, ne) = s.basis[k];
                assert_eq!(s.m(k), (n as f64 - ne as f64) / 2.0);
            }
        }
        let (_, ops) = sector_with_ops(4);
        assert_relative_eq!(ops.casimir()[(2, 2)].re, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn strings_act_right_to_left() {
        // a a+ a b+ |1,2> = a a+ a |1,3> sqrt3 = a a+ |0,3> sqrt3 = a |1,3> sqrt3 = sqrt3 |0,3>
        let (amp, st) = OpString(&[A, Ad, A, Bd]).apply((1, 2)).unwrap();
        assert_relative_eq!(amp, 3f64.sqrt(), max_relative = 1e-15);
        assert_eq!(st, (0, 3));
        assert!(OpString(&[A, Ad, A, Bd]).apply((0, 4)).is_none());
        // a+ a a+ b |0,2> = sqrt2 * 1 * 1 * 1 |1,1>
        let (amp, st) = OpString(&[Ad, A, Ad, B]).apply((0, 2)).unwrap();
        assert_relative_eq!(amp, 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(st, (1, 1));
    }

    #[test]
    fn h0_spectrum() {
        let p = params();
        for n in [1u64, 3, 6] {
            let s = ExcitationSector::new(n);
            let h0 = build_h0(&s, &p);
            let mut ev: Vec<f64> = h0.data.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            for (k, e) in ev.iter().enumerate() {
                let want = unperturbed_energy(n, s.m(k), &p).re;
                assert_relative_eq!(*e, want, max_relative = 1e-12);
            }
            let tr: Complex64 = (0..s.dim()).map(|k| h0.data[(k, k)]).sum();
            assert_relative_eq!(tr.re, HBAR * p.omega_p * n as f64 * (n + 1) as f64, max_relative = 1e-12);
        }
        let s = ExcitationSector::new(1);
        let free = HamiltonianParams { k1: ZERO, ..params() };
        let h0 = build_h0(&s, &free).data;
        assert_eq!(h0[(0, 1)], ZERO);
        assert_eq!(h0[(0, 0)], h0[(1, 1)]);
    }

    #[test]
    fn hprime_hermitian_and_limits() {
        let p = params();
        for n in [1u64, 2, 5, 12] {
            let s = ExcitationSector::new(n);
            let h = build_hprime(&s, &p);
            let scale = h.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(h.max_abs_diff(&h.adjoint()) <= 1e-12 * scale);

            // kappa = 1/N: only the first, second and fourth terms survive
            let q = HamiltonianParams { kappa: p.eta, ..p };
            let mut want = OpString(&[Bd, B]).matrix(&s) * Complex64::new(HBAR * (0.5 * q.omega_p + q.delta), 0.0);
            for st in HPRIME_STRINGS[3] {
                want += st.matrix(&s) * (q.k2 * HBAR);
            }
            let got = build_hprime(&s, &q).data;
            assert!((got - want).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-12 * scale);
        }
    }

    #[test]
    fn rotation_maps_jz_to_jx() {
        for n in [1u64, 2, 9, 30] {
            let rs = RotatedSector::new(n).unwrap();
            let image = &rs.rotation * &rs.ops.jz.data * rs.rotation.adjoint();
            assert!((image - &rs.ops.jx.data).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-10);
            assert_eq!(rs.theta, -FRAC_PI_2);
        }
    }

    #[test]
    fn zero_perturbation() {
        let p = HamiltonianParams { omega_p: 0.0, delta: 0.0, k2: ZERO, kappa: 0.0, eta: 0.0, ..params() };
        let s = ExcitationSector::new(3);
        for k in 0..4 {
            let e = rotated_first_order_energy(&s, &p, s.m(k)).unwrap();
            assert_eq!(e, unperturbed_energy(3, s.m(k), &p));
        }
    }

    #[test]
    fn analytic_matches_rotation() {
        let p = params();
        for n in 0..=30u64 {
            let rs = RotatedSector::new(n).unwrap();
            for k in 0..rs.sector.dim() {
                let m = rs.sector.m(k);
                let num = rs.first_order_shift(&p, m).unwrap();
                let ana = matrix_element_analytic(rs.sector.j, m, &p).unwrap();
                let scale = shift_scale(rs.sector.j, m, &p);
                assert!((num - ana).norm() <= 1e-11 * scale, "n={n} m={m}: {num} vs {ana}");
            }
        }
    }

    #[test]
    fn printed_form_differs_in_two_terms() {
        // j = 1, m = 0: p = q = 1
        for t in [0, 1, 3] {
            assert_eq!(term_diagonal_printed(t, 2.0, 1.0), term_diagonal_analytic(t, 2.0, 1.0));
        }
        assert_ne!(term_diagonal_printed(2, 1.0, 2.0), term_diagonal_analytic(2, 1.0, 2.0));
        assert_ne!(term_diagonal_printed(4, 0.0, 2.0), term_diagonal_analytic(4, 0.0, 2.0));
        // the second term's exchange part (j^2 - m^2) equals p q
        assert_eq!(term_diagonal_analytic(1, 3.0, 2.0), 0.25 * 2.0 + 0.25 * 6.0 + 6.0);
    }

    #[test]
    fn only_first_bracket_survives() {
        let p = HamiltonianParams { kappa: 0.01, eta: 0.01, k2: ZERO, ..params() };
        for (j, m) in [(0.5, 0.5), (2.0, -1.0), (7.5, 2.5)] {
            let e = matrix_element_analytic(j, m, &p).unwrap();
            assert_relative_eq!(e.re, HBAR * (0.5 * p.omega_p + p.delta) * j, max_relative = 1e-14);
        }
    }

    #[test]
    fn top_state_has_no_exciton_terms() {
        let p = params();
        for n in [1u64, 4, 10] {
            let rs = RotatedSector::new(n).unwrap();
            let j = rs.sector.j;
            let num = rs.first_order_shift(&p, j).unwrap();
            let pp = 2.0 * j;
            let want: Complex64 = p
                .term_coefficients()
                .iter()
                .enumerate()
                .map(|(t, c)| c * term_diagonal_analytic(t, pp, 0.0))
                .sum::<Complex64>()
                * HBAR;
            assert!((num - want).norm() <= 1e-11 * shift_scale(j, j, &p));
        }
    }

    #[test]
    fn rejects_bad_m() {
        let p = params();
        assert!(matrix_element_analytic(1.0, 1.5, &p).is_err());
        assert!(matrix_element_analytic(1.0, 0.5, &p).is_err());
        let rs = RotatedSector::new(2).unwrap();
        assert!(rs.first_order_shift(&p, 0.5).is_err());
    }
}
