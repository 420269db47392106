mod common;

use std::f64::consts::PI;

use common::{any_model, hermitian_model};
use nonbloch::model::{SIGMA_X, SIGMA_Y, SIGMA_Z};
use nonbloch::{bloch_hamiltonian, q_polynomial, C64};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn bands_come_in_chiral_pairs(m in any_model(), k in -10.0f64..10.0) {
        let s = bloch_hamiltonian(&m, k);
        prop_assert!((s.e_plus + s.e_minus).norm() < 1e-12);
        prop_assert_eq!(s.h.trace(), C64::new(0.0, 0.0));
    }

    #[test]
    fn q_polynomial_squares_the_bloch_vector(m in any_model()) {
        let q = q_polynomial(&m);
        for j in 0..256 {
            let k = -PI + 2.0 * PI * (j as f64 + 0.37) / 256.0;
            let s = bloch_hamiltonian(&m, k);
            let d2 = s.d[0] * s.d[0] + s.d[1] * s.d[1] + s.d[2] * s.d[2];
            let value = q.eval(C64::from_polar(1.0, -k));
            let scale = d2.norm().max(value.norm()).max(1e-300);
            prop_assert!((value - d2).norm() / scale < 1e-10, "k = {k}: {value} vs {d2}");
            prop_assert!((s.e_plus * s.e_plus - value).norm() / scale.max(1.0) < 1e-12);
        }
    }

    #[test]
    fn pauli_expansion_rebuilds_h(m in any_model(), k in -PI..PI) {
        let s = bloch_hamiltonian(&m, k);
        let h = SIGMA_X * s.d[0] + SIGMA_Y * s.d[1] + SIGMA_Z * s.d[2];
        prop_assert!((h - s.h).norm() < 1e-12 * (1.0 + s.h.norm()));
    }

    #[test]
    fn bloch_sample_is_two_pi_periodic(m in any_model(), k in -PI..PI) {
        let a = bloch_hamiltonian(&m, k);
        let b = bloch_hamiltonian(&m, k + 2.0 * PI);
        prop_assert!((a.h - b.h).norm() < 1e-12 * (1.0 + a.h.norm()));
    }

    #[test]
    fn hermitian_q_is_real_and_non_negative_on_the_circle(m in hermitian_model()) {
        prop_assert!(m.hermitian());
        let q = q_polynomial(&m);
        for j in 0..64 {
            let v = q.eval(C64::from_polar(1.0, 2.0 * PI * j as f64 / 64.0));
            prop_assert!(v.im.abs() < 1e-12 * (1.0 + v.norm()));
            prop_assert!(v.re > -1e-12);
        }
    }

    #[test]
    fn mirroring_swaps_the_sides(m in any_model()) {
        let r = m.mirrored();
        for l in m.offsets() {
            prop_assert_eq!(r.rho(l), m.rho(-l));
            prop_assert_eq!(r.theta(l), m.theta(-l));
            prop_assert_eq!(r.phi(l), m.phi(-l));
        }
    }
}
