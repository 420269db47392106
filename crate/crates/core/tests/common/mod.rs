#![allow(dead_code)]

use nonbloch::{LatticeModel, C64};
use proptest::prelude::*;

pub fn complex(scale: f64) -> impl Strategy<Value = C64> {
    (-scale..scale, -scale..scale).prop_map(|(re, im)| C64::new(re, im))
}

/// A model of range 1..=3 with every coupling drawn from the unit square.
pub fn any_model() -> impl Strategy<Value = LatticeModel> {
    (1usize..=3).prop_flat_map(|q| {
        let n = 2 * q + 1;
        (
            proptest::collection::vec(complex(1.0), n),
            proptest::collection::vec(complex(1.0), n),
            proptest::collection::vec(complex(1.0), n),
        )
            .prop_map(move |(rho, theta, phi)| {
                let mut m = LatticeModel::new(q).unwrap();
                for (i, l) in (-(q as i64)..=q as i64).enumerate() {
                    m.set_rho(l, rho[i]).unwrap();
                    m.set_theta(l, theta[i]).unwrap();
                    m.set_phi(l, phi[i]).unwrap();
                }
                m
            })
    })
}

/// A Hermitian model: `ρ_{-l} = conj ρ_l`, `θ_{-l} = conj φ_l`.
pub fn hermitian_model() -> impl Strategy<Value = LatticeModel> {
    (1usize..=3).prop_flat_map(|q| {
        let n = q + 1;
        (
            proptest::collection::vec(complex(1.0), n),
            proptest::collection::vec(complex(1.0), n),
            proptest::collection::vec(complex(1.0), n),
        )
            .prop_map(move |(rho, theta, phi)| {
                let mut m = LatticeModel::new(q).unwrap();
                m.set_rho(0, rho[0].re).unwrap();
                m.set_theta(0, theta[0]).unwrap();
                m.set_phi(0, theta[0].conj()).unwrap();
                for l in 1..=q {
                    let li = l as i64;
                    m.set_rho(li, rho[l]).unwrap();
                    m.set_rho(-li, rho[l].conj()).unwrap();
                    m.set_theta(li, theta[l]).unwrap();
                    m.set_phi(-li, theta[l].conj()).unwrap();
                    m.set_phi(li, phi[l]).unwrap();
                    m.set_theta(-li, phi[l].conj()).unwrap();
                }
                m
            })
    })
}

/// Directed Hausdorff distance: the farthest point of `a` from the set `b`.
pub fn directed(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    directed(a, b).max(directed(b, a))
}
