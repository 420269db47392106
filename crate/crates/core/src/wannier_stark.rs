//! Wannier-Stark ladders of the lattice under a constant force `F`.
//!
//! Transporting the Bloch-basis amplitudes once around the Brillouin zone,
//! `i F dψ/dk = H(k) ψ` for `k` from `-π` to `π`, gives the monodromy `U`.
//! With `cos θ = tr(U)/2` the spectrum is the pair of ladders
//! `E = lF ± Fθ/2π`.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::model::{bloch_hamiltonian, collapse_energy, q_polynomial, LatticeModel, Mat2, C64, I};
use crate::propagate::ordered_exponential;

/// Floor on the number of integration steps across the zone.
pub const DEFAULT_STEPS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

fn check_force(force: f64) -> Result<()> {
    if force == 0.0 || !force.is_finite() {
        Err(Error::ZeroForce)
    } else {
        Ok(())
    }
}

/// Largest Frobenius norm of `H(k)` over a coarse zone sample.
pub(crate) fn max_bloch_norm(model: &LatticeModel) -> f64 {
    (0..64)
        .map(|j| model.bloch_matrix(-PI + 2.0 * PI * j as f64 / 64.0).norm())
        .fold(0.0, f64::max)
}

/// Steps needed to keep each Magnus step at a phase of about 0.01, never
/// fewer than [`DEFAULT_STEPS`].
pub fn default_steps(model: &LatticeModel, force: f64) -> usize {
    let phase = 2.0 * PI * max_bloch_norm(model) / force.abs();
    DEFAULT_STEPS.max((phase / 0.01).ceil() as usize)
}

fn generator(model: &LatticeModel, force: f64) -> impl Fn(f64) -> Mat2 + '_ {
    let scale = -I / force;
    move |k| model.bloch_matrix(k) * scale
}

/// Ordered exponential across the zone with exactly `steps` Magnus steps.
pub fn monodromy(model: &LatticeModel, force: f64, steps: usize) -> Result<Mat2> {
    check_force(force)?;
    if steps == 0 {
        return Err(Error::BadSize("monodromy needs at least one step".into()));
    }
    Ok(ordered_exponential(generator(model, force), -PI, PI, steps))
}

/// Eigenvector of a 2×2 matrix for eigenvalue `lambda`, `None` if the matrix
/// is `lambda` times the identity.
pub(crate) fn eigvec2(u: &Mat2, lambda: C64) -> Option<[C64; 2]> {
    let v1 = [u[(0, 1)], lambda - u[(0, 0)]];
    let v2 = [lambda - u[(1, 1)], u[(1, 0)]];
    let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
    let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
    if n1 == 0.0 && n2 == 0.0 {
        None
    } else if n1 >= n2 {
        Some(v1)
    } else {
        Some(v2)
    }
}

/// `|⟨u₁|u₂⟩| / (‖u₁‖‖u₂‖)`.
pub(crate) fn overlap(u1: &[C64; 2], u2: &[C64; 2]) -> f64 {
    let dot = u1[0].conj() * u2[0] + u1[1].conj() * u2[1];
    let n1 = (u1[0].norm_sqr() + u1[1].norm_sqr()).sqrt();
    let n2 = (u2[0].norm_sqr() + u2[1].norm_sqr()).sqrt();
    (dot.norm() / (n1 * n2)).min(1.0)
}

/// Eigen-decomposition of a unit-determinant 2×2 matrix in terms of its
/// angle: eigenvalue `e^{-iθ}` for the plus branch, `e^{+iθ}` for minus.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct AngleDecomposition {
    pub cos_theta: C64,
    pub theta: C64,
    /// Eigenvectors for the plus and minus branches.
    pub vectors: [[C64; 2]; 2],
    pub overlap: f64,
    pub defective: bool,
}

pub(crate) const DEFECT_TOL: f64 = 1e-9;

/// Principal arccosine in Kahan's componentwise form, which stays finite for
/// the huge traces of strongly amplifying monodromies.
pub(crate) fn acos_principal(z: C64) -> C64 {
    let xi = (1.0 - z).sqrt();
    let eta = (1.0 + z).sqrt();
    C64::new(2.0 * xi.re.atan2(eta.re), (eta.conj() * xi).im.asinh())
}

pub(crate) fn decompose(u: &Mat2) -> AngleDecomposition {
    let cos_theta = 0.5 * (u[(0, 0)] + u[(1, 1)]);
    let theta = acos_principal(cos_theta);
    let (plus, minus) = ((-I * theta).exp(), (I * theta).exp());
    let vectors = match (eigvec2(u, plus), eigvec2(u, minus)) {
        (Some(p), Some(m)) => [p, m],
        _ => [
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        ],
    };
    let raw = overlap(&vectors[0], &vectors[1]);
    let defective = raw > 1.0 - DEFECT_TOL;
    AngleDecomposition {
        cos_theta,
        theta,
        vectors,
        overlap: if defective { 1.0 } else { raw },
        defective,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WsResult {
    pub force: f64,
    pub monodromy: Mat2,
    pub cos_theta: C64,
    /// Principal arccosine, `Re θ` in `[0, π]`.
    pub theta: C64,
    /// Eigenvectors of `U` for the plus and minus ladders.
    pub eigenvectors: [[C64; 2]; 2],
    /// Overlap of the two eigenvectors; exactly 1 when `U` is defective.
    pub theta_overlap: f64,
    /// The eigenvectors coalesce: a Wannier-Stark exceptional point.
    pub defective: bool,
    /// Bloch period `2π/|F|`.
    pub t_bloch: f64,
    /// Beat period between the ladders, `(π / Re θ)·t_B`.
    pub t_ws: f64,
}

impl WsResult {
    /// `lF ± Fθ/2π`.
    pub fn ladder(&self, l: i64, branch: Branch) -> C64 {
        C64::new(l as f64 * self.force, 0.0) + branch.sign() * self.force * self.theta / (2.0 * PI)
    }
}

pub fn ws_solve(model: &LatticeModel, force: f64) -> Result<WsResult> {
    check_force(force)?;
    ws_solve_with_steps(model, force, default_steps(model, force))
}

pub fn ws_solve_with_steps(model: &LatticeModel, force: f64, steps: usize) -> Result<WsResult> {
    let u = monodromy(model, force, steps)?;
    let d = decompose(&u);
    let t_bloch = 2.0 * PI / force.abs();
    Ok(WsResult {
        force,
        monodromy: u,
        cos_theta: d.cos_theta,
        theta: d.theta,
        eigenvectors: d.vectors,
        theta_overlap: d.overlap,
        defective: d.defective,
        t_bloch,
        t_ws: PI / d.theta.re * t_bloch,
    })
}

/// Semiclassical angle in closed form, `(2π/F)·sqrt(c_0)`, together with the
/// band-average quadrature `(1/F)∮E_+(k) dk` along a continuous branch.
///
/// The two agree whenever `sqrt(Q)` is analytic on one side of the unit
/// circle, in particular for one-sided hoppings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WkbAngle {
    pub closed_form: C64,
    pub quadrature: C64,
}

pub fn wkb_angle(model: &LatticeModel, force: f64) -> Result<WkbAngle> {
    check_force(force)?;
    let c0 = q_polynomial(model).coeff(0);
    let closed_form = 2.0 * PI / force * c0.sqrt();
    let m = 4096;
    let mut prev = bloch_hamiltonian(model, -PI).e_plus;
    let mut sum = C64::new(0.0, 0.0);
    for j in 0..m {
        let e = bloch_hamiltonian(model, -PI + 2.0 * PI * j as f64 / m as f64).e_plus;
        let e = if (e - prev).norm() <= (e + prev).norm() { e } else { -e };
        sum += e;
        prev = e;
    }
    let quadrature = sum * (2.0 * PI / m as f64) / force;
    Ok(WkbAngle {
        closed_form,
        quadrature,
    })
}

/// `±2E_0/n` for `n = 1..=n_max`, in that order.
pub fn resonance_forces(model: &LatticeModel, n_max: usize) -> Vec<f64> {
    let e0 = collapse_energy(model);
    if !(e0.re > 0.0) || e0.im != 0.0 {
        log::warn!("collapse energy {e0} is not real and positive; using its real part");
    }
    (1..=n_max)
        .flat_map(|n| {
            let f = 2.0 * e0.re / n as f64;
            [f, -f]
        })
        .collect()
}

/// Wannier-basis amplitudes of one ladder eigenstate on a window of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct WsEigenstate {
    pub l: i64,
    pub branch: Branch,
    /// Cell indices of the amplitudes.
    pub cells: RangeInclusive<i64>,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub energy: C64,
}

const EIGENSTATE_SAMPLES: usize = 512;

/// Eigenstate of the driven lattice at energy `lF ± Fθ/2π`, normalized to
/// unit norm on `cells`.
pub fn ws_eigenstate(
    model: &LatticeModel,
    force: f64,
    l: i64,
    branch: Branch,
    cells: RangeInclusive<i64>,
) -> Result<WsEigenstate> {
    check_force(force)?;
    if cells.is_empty() {
        return Err(Error::BadSize("empty cell window".into()));
    }
    let m = EIGENSTATE_SAMPLES;
    let sub = default_steps(model, force).div_ceil(m);
    let h = 2.0 * PI / m as f64;
    let gen = generator(model, force);
    let mut transport = Vec::with_capacity(m + 1);
    transport.push(Mat2::identity());
    for j in 0..m {
        let k = -PI + j as f64 * h;
        let step = ordered_exponential(&gen, k, k + h, sub);
        transport.push(step * transport[j]);
    }
    let d = decompose(&transport[m]);
    if d.defective {
        return Err(Error::AtExceptionalPoint);
    }
    let v = match branch {
        Branch::Plus => d.vectors[0],
        Branch::Minus => d.vectors[1],
    };
    let nu = C64::new(l as f64, 0.0) + branch.sign() * d.theta / (2.0 * PI);
    let samples: Vec<(f64, C64, C64)> = (0..m)
        .map(|j| {
            let p = &transport[j];
            (
                -PI + j as f64 * h,
                p[(0, 0)] * v[0] + p[(0, 1)] * v[1],
                p[(1, 0)] * v[0] + p[(1, 1)] * v[1],
            )
        })
        .collect();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for n in cells.clone() {
        let (mut sa, mut sb) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for &(k, fa, fb) in &samples {
            let phase = (I * k * (nu + n as f64)).exp();
            sa += fa * phase;
            sb += fb * phase;
        }
        a.push(sa / m as f64);
        b.push(sb / m as f64);
    }
    let norm = a.iter().chain(&b).map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    for z in a.iter_mut().chain(b.iter_mut()) {
        *z /= norm;
    }
    let energy = C64::new(l as f64 * force, 0.0) + branch.sign() * force * d.theta / (2.0 * PI);
    Ok(WsEigenstate {
        l,
        branch,
        cells,
        a,
        b,
        energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::example_model;
    use crate::obc::build_obc_matrix;

    const E0: f64 = 2.039607805437114;

    fn onsite(mass: f64) -> LatticeModel {
        let mut m = LatticeModel::new(1).unwrap();
        m.set_rho(0, mass).unwrap();
        m
    }

    #[test]
    fn constant_hamiltonian_monodromy() {
        let (mass, f) = (2.0, 0.7);
        let u = monodromy(&onsite(mass), f, 64).unwrap();
        let phase = 2.0 * PI * mass / f;
        assert!((u[(0, 0)] - (-I * phase).exp()).norm() < 1e-12);
        assert!((u[(1, 1)] - (I * phase).exp()).norm() < 1e-12);
        let r = ws_solve(&onsite(mass), f).unwrap();
        assert!((r.cos_theta - phase.cos()).norm() < 1e-12);
    }

    #[test]
    fn arccosine_matches_the_library_and_survives_large_arguments() {
        for z in [
            C64::new(0.3, 0.0),
            C64::new(1.7, 0.0),
            C64::new(-2.5, 0.4),
            C64::new(0.2, -3.0),
            C64::new(-0.9, -0.1),
        ] {
            assert!((acos_principal(z) - z.acos()).norm() < 1e-13, "{z}");
        }
        let z = C64::new(-1.9e9, -1.7e9);
        let t = acos_principal(z);
        assert!(t.is_finite());
        assert!((t.cos() - z).norm() < 1e-12 * z.norm());
    }

    #[test]
    fn zero_force_is_rejected() {
        let m = example_model(2.0, 0.4, 1.0, 0.5);
        assert_eq!(monodromy(&m, 0.0, 10), Err(Error::ZeroForce));
        assert_eq!(ws_solve(&m, 0.0), Err(Error::ZeroForce));
        assert_eq!(wkb_angle(&m, 0.0), Err(Error::ZeroForce));
    }

    #[test]
    fn unit_determinant() {
        let u = monodromy(&example_model(2.0, 0.4, 1.0, 0.6), 0.9, 4096).unwrap();
        assert!((u.determinant() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn collapse_angle_is_exact() {
        let m = example_model(2.0, 0.4, 1.0, 1.0);
        let r = ws_solve(&m, E0).unwrap();
        assert!((r.cos_theta - 1.0).norm() < 1e-8);
        for f in [0.37, 1.3, 3.9, -2.2] {
            let r = ws_solve(&m, f).unwrap();
            assert!((r.cos_theta - (2.0 * PI * E0 / f).cos()).norm() < 1e-8, "F = {f}");
        }
    }

    #[test]
    fn exceptional_points_at_resonance() {
        let m = example_model(2.0, 0.4, 1.0, 1.0);
        for n in 1..=3 {
            let r = ws_solve(&m, 2.0 * E0 / n as f64).unwrap();
            assert!(r.theta_overlap >= 1.0 - 1e-6, "n = {n}: {}", r.theta_overlap);
        }
        let r = ws_solve(&example_model(2.0, 0.4, 1.0, 0.2), 0.77 * E0).unwrap();
        assert!(r.theta_overlap < 1.0 - 1e-3);
        assert!(!r.defective);
    }

    #[test]
    fn ladder_spacing_and_periods() {
        let r = ws_solve(&example_model(2.0, 0.4, 1.0, 0.6), 1.1).unwrap();
        for l in -3..3 {
            for b in [Branch::Plus, Branch::Minus] {
                assert!((r.ladder(l + 1, b) - r.ladder(l, b) - 1.1).norm() < 1e-14);
            }
        }
        assert!((r.t_bloch - 2.0 * PI / 1.1).abs() < 1e-15);
        assert!((r.t_ws - PI / r.theta.re * r.t_bloch).abs() < 1e-12);
    }

    #[test]
    fn wkb_closed_forms() {
        let (mass, t0, t, d, f) = (2.0, 0.4, 1.0, 0.6, 0.8);
        let w = wkb_angle(&example_model(mass, t0, t, d), f).unwrap();
        let expected = 2.0 * PI / f * (mass * mass + t0 * t0 + t * t - d * d).sqrt();
        assert!((w.closed_form - expected).norm() < 1e-12);

        let w = wkb_angle(&example_model(mass, t0, t, 1.0), f).unwrap();
        assert!((w.closed_form - 2.0 * PI * E0 / f).norm() < 1e-12);
        assert!((w.quadrature - w.closed_form).norm() < 1e-8);

        let w = wkb_angle(&onsite(mass), f).unwrap();
        assert!((w.closed_form - 2.0 * PI * mass / f).norm() < 1e-12);
        assert!((w.quadrature - w.closed_form).norm() < 1e-10);
    }

    #[test]
    fn resonances() {
        let m = example_model(2.0, 0.4, 1.0, 1.0);
        let f = resonance_forces(&m, 2);
        assert_eq!(f.len(), 4);
        assert!((f[0] - 2.0 * E0).abs() < 1e-14 && (f[1] + 2.0 * E0).abs() < 1e-14);
        assert!((f[2] - E0).abs() < 1e-14 && (f[3] + E0).abs() < 1e-14);
        assert_eq!(resonance_forces(&m, 1).len(), 2);
    }

    #[test]
    fn eigenstate_translation_and_decay() {
        let m = example_model(2.0, 0.4, 1.0, 0.0);
        let s0 = ws_eigenstate(&m, 0.5, 0, Branch::Plus, -40..=40).unwrap();
        let s3 = ws_eigenstate(&m, 0.5, 3, Branch::Plus, -40..=40).unwrap();
        // Raising l by 3 moves the pattern 3 cells towards negative n.
        for i in 3..81 {
            assert!((s3.a[i - 3] - s0.a[i]).norm() < 1e-8);
            assert!((s3.b[i - 3] - s0.b[i]).norm() < 1e-8);
        }
        for edge in [0, 80] {
            assert!(s0.a[edge].norm() < 1e-10 && s0.b[edge].norm() < 1e-10);
        }
    }

    #[test]
    fn eigenstate_solves_the_driven_lattice() {
        for (delta, f, branch) in [
            (0.0, 0.5, Branch::Plus),
            (0.6, 1.3, Branch::Minus),
            (0.3, -0.9, Branch::Plus),
        ] {
            let m = example_model(2.0, 0.4, 1.0, delta);
            let (lo, hi) = (-40i64, 40i64);
            let s = ws_eigenstate(&m, f, 1, branch, lo..=hi).unwrap();
            let cells = (hi - lo + 1) as usize;
            let mut h = build_obc_matrix(&m, cells).unwrap().matrix;
            for (i, n) in (lo..=hi).enumerate() {
                h[(2 * i, 2 * i)] -= f * n as f64;
                h[(2 * i + 1, 2 * i + 1)] -= f * n as f64;
            }
            let psi = nalgebra::DVector::from_fn(2 * cells, |r, _| if r % 2 == 0 { s.a[r / 2] } else { s.b[r / 2] });
            let res = (&h * &psi - &psi * s.energy).norm();
            assert!(res < 1e-6, "δ = {delta}, F = {f}: {res}");
        }
    }

    #[test]
    fn eigenstate_refuses_exceptional_points() {
        let m = example_model(2.0, 0.4, 1.0, 1.0);
        assert_eq!(
            ws_eigenstate(&m, E0, 0, Branch::Plus, -5..=5),
            Err(Error::AtExceptionalPoint)
        );
    }
}
