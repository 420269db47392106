//! The two-band lattice, its Bloch Hamiltonian and the Laurent polynomial
//! `Q(β) = d_x² + d_y² + d_z²` evaluated at `β = e^{-ik}`.
//!
//! Energies are unit-agnostic. All figure recipes measure them in units of
//! the inter-cell hopping `t`.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub const SIGMA_X: Mat2 = Mat2::new(ZERO, ONE, ONE, ZERO);
pub const SIGMA_Y: Mat2 = Mat2::new(ZERO, C64::new(0.0, -1.0), I, ZERO);
pub const SIGMA_Z: Mat2 = Mat2::new(ONE, ZERO, ZERO, C64::new(-1.0, 0.0));

/// Which way the hoppings point when all of one side vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Only offsets `l >= 0` carry couplings.
    Right,
    /// Only offsets `l <= 0` carry couplings.
    Left,
}

/// Couplings `ρ_l` (intra-sublattice), `θ_l` (A←B) and `φ_l` (B←A) for
/// `l` in `[-q, q]`, stored densely with explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    range: usize,
    rho: Vec<C64>,
    theta: Vec<C64>,
    phi: Vec<C64>,
}

impl LatticeModel {
    /// A model with hopping range `q` and every coupling zero.
    pub fn new(range: usize) -> Result<Self> {
        if range == 0 {
            return Err(Error::ZeroRange);
        }
        let len = 2 * range + 1;
        Ok(LatticeModel {
            range,
            rho: vec![ZERO; len],
            theta: vec![ZERO; len],
            phi: vec![ZERO; len],
        })
    }

    pub fn range(&self) -> usize {
        self.range
    }

    fn slot(&self, offset: i64) -> Option<usize> {
        let q = self.range as i64;
        (-q..=q).contains(&offset).then(|| (offset + q) as usize)
    }

    fn checked_slot(&self, offset: i64) -> Result<usize> {
        self.slot(offset).ok_or(Error::OffsetOutOfRange {
            offset,
            range: self.range,
        })
    }

    /// `ρ_l`, zero outside the range.
    pub fn rho(&self, offset: i64) -> C64 {
        self.slot(offset).map_or(ZERO, |s| self.rho[s])
    }

    /// `θ_l`, zero outside the range.
    pub fn theta(&self, offset: i64) -> C64 {
        self.slot(offset).map_or(ZERO, |s| self.theta[s])
    }

    /// `φ_l`, zero outside the range.
    pub fn phi(&self, offset: i64) -> C64 {
        self.slot(offset).map_or(ZERO, |s| self.phi[s])
    }

    pub fn set_rho(&mut self, offset: i64, value: impl Into<C64>) -> Result<&mut Self> {
        let s = self.checked_slot(offset)?;
        self.rho[s] = value.into();
        Ok(self)
    }

    pub fn set_theta(&mut self, offset: i64, value: impl Into<C64>) -> Result<&mut Self> {
        let s = self.checked_slot(offset)?;
        self.theta[s] = value.into();
        Ok(self)
    }

    pub fn set_phi(&mut self, offset: i64, value: impl Into<C64>) -> Result<&mut Self> {
        let s = self.checked_slot(offset)?;
        self.phi[s] = value.into();
        Ok(self)
    }

    /// Offsets `-q..=q` in ascending order.
    pub fn offsets(&self) -> impl Iterator<Item = i64> {
        let q = self.range as i64;
        -q..=q
    }

    /// `ρ_{-l} = conj(ρ_l)` and `θ_{-l} = conj(φ_l)` for every `l`, compared exactly.
    pub fn hermitian(&self) -> bool {
        self.offsets()
            .all(|l| self.rho(-l) == self.rho(l).conj() && self.theta(-l) == self.phi(l).conj())
    }

    /// Direction of the hoppings if every coupling on one side vanishes.
    ///
    /// A model with only on-site terms counts as [`Side::Right`].
    pub fn one_sided(&self) -> Option<Side> {
        let silent = |mut range: std::ops::RangeInclusive<i64>| {
            range.all(|l| self.rho(l) == ZERO && self.theta(l) == ZERO && self.phi(l) == ZERO)
        };
        let q = self.range as i64;
        if silent(-q..=-1) {
            Some(Side::Right)
        } else if silent(1..=q) {
            Some(Side::Left)
        } else {
            None
        }
    }

    /// Reflect the lattice, `l -> -l` for every coupling.
    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        out.rho.reverse();
        out.theta.reverse();
        out.phi.reverse();
        out
    }

    /// Largest absolute row sum of the hopping operator. Bounds every
    /// eigenvalue of the Bloch and open-chain Hamiltonians.
    pub fn energy_scale(&self) -> f64 {
        let rho: f64 = self.rho.iter().map(|c| c.norm()).sum();
        let theta: f64 = self.theta.iter().map(|c| c.norm()).sum();
        let phi: f64 = self.phi.iter().map(|c| c.norm()).sum();
        rho + theta.max(phi)
    }

    /// The Bloch matrix `H(k)` alone, without the derived sample data.
    pub fn bloch_matrix(&self, k: f64) -> Mat2 {
        let (mut hz, mut h12, mut h21) = (ZERO, ZERO, ZERO);
        for (slot, l) in self.offsets().enumerate() {
            let phase = C64::from_polar(1.0, -k * l as f64);
            hz += self.rho[slot] * phase;
            h12 += self.theta[slot] * phase;
            h21 += self.phi[slot] * phase;
        }
        Mat2::new(hz, h12, h21, -hz)
    }
}

/// The two-band chain used throughout the figures: on-site mass `ρ_0 = Δ`,
/// intra-cell hopping `θ_0 = φ_0 = t0`, and asymmetric inter-cell hoppings
/// `θ_1 = t + δ`, `φ_{-1} = t - δ`.
pub fn example_model(mass: f64, t0: f64, t: f64, delta: f64) -> LatticeModel {
    let mut m = LatticeModel::new(1).expect("range 1 is valid");
    m.rho[1] = mass.into();
    m.theta[1] = t0.into();
    m.phi[1] = t0.into();
    m.theta[2] = (t + delta).into();
    m.phi[0] = (t - delta).into();
    m
}

/// Bloch Hamiltonian data at one quasi-momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochSample {
    /// Quasi-momentum reduced into `[-π, π)`.
    pub k: f64,
    /// `(d_x, d_y, d_z)` with `H = σ·d`.
    pub d: [C64; 3],
    pub h: Mat2,
    pub e_plus: C64,
    pub e_minus: C64,
}

/// Reduce a real quasi-momentum into `[-π, π)`.
pub fn reduce_k(k: f64) -> f64 {
    let r = k - 2.0 * PI * ((k + PI) / (2.0 * PI)).floor();
    if r >= PI {
        r - 2.0 * PI
    } else {
        r
    }
}

pub fn bloch_hamiltonian(model: &LatticeModel, k: f64) -> BlochSample {
    let k = reduce_k(k);
    let h = model.bloch_matrix(k);
    let (h12, h21, dz) = (h[(0, 1)], h[(1, 0)], h[(0, 0)]);
    let dx = 0.5 * (h12 + h21);
    let dy = 0.5 * I * (h12 - h21);
    let e_plus = (dx * dx + dy * dy + dz * dz).sqrt();
    BlochSample {
        k,
        d: [dx, dy, dz],
        h,
        e_plus,
        e_minus: -e_plus,
    }
}

/// `Q(β) = Σ_m c_m β^m` for `m` in `[-2q, 2q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    range: usize,
    coeffs: Vec<C64>,
}

impl LaurentPoly {
    /// Hopping range `q` of the model the polynomial came from.
    pub fn range(&self) -> usize {
        self.range
    }

    /// `c_m`, zero outside `[-2q, 2q]`.
    pub fn coeff(&self, power: i64) -> C64 {
        let top = 2 * self.range as i64;
        if (-top..=top).contains(&power) {
            self.coeffs[(power + top) as usize]
        } else {
            ZERO
        }
    }

    /// Coefficients `c_{-2q} ..= c_{2q}`, lowest power first.
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn eval(&self, beta: C64) -> C64 {
        let shift = beta.powi(-2 * self.range as i32);
        let poly = self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * beta + c);
        poly * shift
    }
}

pub fn q_polynomial(model: &LatticeModel) -> LaurentPoly {
    let q = model.range;
    let mut coeffs = vec![ZERO; 4 * q + 1];
    let width = 2 * q + 1;
    // Slot index s corresponds to offset s - q, so slots s1 + s2 land on power
    // s1 + s2 - 2q, i.e. coefficient index s1 + s2.
    for s1 in 0..width {
        for s2 in 0..width {
            coeffs[s1 + s2] += model.rho[s1] * model.rho[s2] + model.theta[s1] * model.phi[s2];
        }
    }
    LaurentPoly { range: q, coeffs }
}

/// `E_0 = sqrt(ρ_0² + φ_0 θ_0)`, principal root.
pub fn collapse_energy(model: &LatticeModel) -> C64 {
    let rho0 = model.rho(0);
    (rho0 * rho0 + model.phi(0) * model.theta(0)).sqrt()
}

/// Band-edge energies of the example model on its GBZ segment,
/// `E_{1,2} = sqrt(Δ² + (t0 ∓ sqrt(t² - δ²))²)`, valid for `|δ| < t`.
pub fn example_band_edges(mass: f64, t0: f64, t: f64, delta: f64) -> (f64, f64) {
    let s = (t * t - delta * delta).sqrt();
    let e1 = (mass * mass + (t0 - s) * (t0 - s)).sqrt();
    let e2 = (mass * mass + (t0 + s) * (t0 + s)).sqrt();
    (e1.min(e2), e1.max(e2))
}

/// Radius of the example model's GBZ circle, `sqrt((t - δ)/(t + δ))`.
pub fn example_gbz_radius(t: f64, delta: f64) -> f64 {
    ((t - delta) / (t + delta)).sqrt()
}

/// Samples of the upper Bloch band `E_+(k)` on a uniform grid of `n` points.
pub fn pbc_band(model: &LatticeModel, n: usize) -> Vec<C64> {
    (0..n)
        .map(|j| {
            let k = -PI + 2.0 * PI * j as f64 / n as f64;
            bloch_hamiltonian(model, k).e_plus
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn zero_range_is_rejected() {
        assert_eq!(LatticeModel::new(0), Err(Error::ZeroRange));
    }

    #[test]
    fn setters_check_the_range() {
        let mut m = LatticeModel::new(1).unwrap();
        assert!(m.set_rho(2, 1.0).is_err());
        m.set_theta(-1, C64::new(0.5, 0.25)).unwrap();
        assert_eq!(m.theta(-1), C64::new(0.5, 0.25));
        assert_eq!(m.theta(7), ZERO);
    }

    #[test]
    fn example_model_couplings() {
        let m = example_model(2.0, 0.4, 1.0, 0.6);
        assert_eq!(m.range(), 1);
        assert_relative_eq!(m.theta(1).re, 1.6);
        assert_relative_eq!(m.phi(-1).re, 0.4);
        assert_eq!(m.rho(0), c(2.0));
        assert_eq!(m.theta(0), c(0.4));
        assert_eq!(m.phi(0), c(0.4));
        let nonzero = m
            .offsets()
            .flat_map(|l| [m.rho(l), m.theta(l), m.phi(l)])
            .filter(|v| *v != ZERO)
            .count();
        assert_eq!(nonzero, 5);
    }

    #[test]
    fn hermitian_and_one_sided_flags() {
        assert!(example_model(2.0, 0.4, 1.0, 0.0).hermitian());
        assert!(!example_model(2.0, 0.4, 1.0, 0.6).hermitian());
        assert_eq!(example_model(2.0, 0.4, 1.0, 1.0).one_sided(), Some(Side::Right));
        assert_eq!(example_model(2.0, 0.4, 1.0, -1.0).one_sided(), Some(Side::Left));
        assert_eq!(example_model(2.0, 0.4, 1.0, 0.6).one_sided(), None);
        assert_eq!(
            example_model(2.0, 0.4, 1.0, 1.0).mirrored().one_sided(),
            Some(Side::Left)
        );
        assert_eq!(LatticeModel::new(2).unwrap().one_sided(), Some(Side::Right));
    }

    #[test]
    fn bloch_sample_at_k_zero() {
        let s = bloch_hamiltonian(&example_model(2.0, 0.4, 1.0, 0.0), 0.0);
        assert_relative_eq!(s.d[0].re, 1.4, epsilon = 1e-15);
        assert!(s.d[0].im.abs() < 1e-15);
        assert!(s.d[1].norm() < 1e-15);
        assert_eq!(s.d[2], c(2.0));
        assert_relative_eq!(s.e_plus.re, (4.0f64 + 1.96).sqrt(), epsilon = 1e-14);
        assert_eq!(s.e_minus, -s.e_plus);
        assert_eq!(s.h.trace(), ZERO);
    }

    #[test]
    fn pauli_decomposition() {
        let m = example_model(2.0, 0.4, 1.0, 0.6);
        for k in [-3.0, -0.7, 0.2, 1.9] {
            let s = bloch_hamiltonian(&m, k);
            let rebuilt = SIGMA_X * s.d[0] + SIGMA_Y * s.d[1] + SIGMA_Z * s.d[2];
            assert!((rebuilt - s.h).norm() < 1e-14);
        }
    }

    #[test]
    fn k_reduction() {
        assert_eq!(reduce_k(PI), -PI);
        assert_eq!(reduce_k(-PI), -PI);
        assert_relative_eq!(reduce_k(0.5 + 4.0 * PI), 0.5, epsilon = 1e-14);
        let m = example_model(2.0, 0.4, 1.0, 0.6);
        let a = bloch_hamiltonian(&m, 0.3);
        let b = bloch_hamiltonian(&m, 0.3 + 2.0 * PI);
        assert!((a.h - b.h).norm() < 1e-14);
        assert!((a.e_plus - b.e_plus).norm() < 1e-14);
    }

    #[test]
    fn collapse_model_squares_to_q() {
        let m = example_model(2.0, 0.4, 1.0, 1.0);
        let qp = q_polynomial(&m);
        for k in [-2.5, -1.0, 0.0, 0.4, 3.0] {
            let s = bloch_hamiltonian(&m, k);
            let q = qp.eval(C64::from_polar(1.0, -k));
            assert!((s.e_plus * s.e_plus - q).norm() < 1e-13);
        }
    }

    #[test]
    fn example_q_coefficients() {
        let (mass, t0, t, d) = (2.0, 0.4, 1.0, 0.6);
        let qp = q_polynomial(&example_model(mass, t0, t, d));
        assert_relative_eq!(
            qp.coeff(0).re,
            mass * mass + t0 * t0 + (t + d) * (t - d),
            epsilon = 1e-14
        );
        assert_relative_eq!(qp.coeff(1).re, t0 * (t + d), epsilon = 1e-14);
        assert_relative_eq!(qp.coeff(-1).re, t0 * (t - d), epsilon = 1e-14);
        assert_eq!(qp.coeff(2), ZERO);
        assert_eq!(qp.coeff(-2), ZERO);
        assert_eq!(qp.coeff(9), ZERO);
    }

    #[test]
    fn onsite_only_q() {
        let mut m = LatticeModel::new(1).unwrap();
        m.set_rho(0, 2.0).unwrap();
        let qp = q_polynomial(&m);
        assert_eq!(qp.coeff(0), c(4.0));
        assert!(qp.coeffs().iter().enumerate().all(|(i, v)| i == 2 || *v == ZERO));
    }

    #[test]
    fn hermitian_q_is_conjugate_symmetric() {
        let qp = q_polynomial(&example_model(2.0, 0.4, 1.0, 0.0));
        assert_eq!(qp.coeff(1), qp.coeff(-1).conj());
    }

    #[test]
    fn collapse_energy_values() {
        for d in [0.0, 0.3, 1.0] {
            let e0 = collapse_energy(&example_model(2.0, 0.4, 1.0, d));
            assert_relative_eq!(e0.re, 2.039607805437114, epsilon = 1e-14);
            assert_eq!(e0.im, 0.0);
            assert_relative_eq!(e0.re * e0.re, 2.0 * 2.0 + 0.4 * 0.4, epsilon = 1e-14);
        }
        assert_eq!(collapse_energy(&LatticeModel::new(1).unwrap()), ZERO);
    }

    #[test]
    fn band_edges_and_radius() {
        let (e1, e2) = example_band_edges(2.0, 0.4, 1.0, 0.6);
        assert_relative_eq!(e1, (4.0f64 + 0.16).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(e2, (4.0f64 + 1.44).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(example_gbz_radius(1.0, 0.6), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn energy_scale_bounds_the_band() {
        let m = example_model(2.0, 0.4, 1.0, 0.6);
        let scale = m.energy_scale();
        assert!(pbc_band(&m, 64).iter().all(|e| e.norm() <= scale));
    }
}
