//! Bands, generalized Brillouin zones, open-chain spectra, Wannier-Stark
//! ladders and driven dynamics for two-band non-Hermitian lattices.
//!
//! Start from a [`LatticeModel`], usually the four-parameter
//! [`example_model`], and hand it to the analysis of your choice:
//!
//! ```
//! use nonbloch::{collapse_energy, example_model, gbz_residual, C64};
//!
//! let model = example_model(2.0, 0.4, 1.0, 0.6);
//! let e0 = collapse_energy(&model);
//! assert!((e0.re - 4.16f64.sqrt()).abs() < 1e-14);
//!
//! // The middle of the real segment (E1, E2) belongs to the open-chain band.
//! let r = gbz_residual(&model, C64::new(2.2, 0.0)).unwrap();
//! assert!(r < 1e-8);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod gbz;
pub mod model;
pub mod obc;
pub mod polyroots;
mod propagate;
pub mod wannier_stark;

pub use error::{Error, Result};
pub use gbz::{collapse_scaling, gbz_residual, trace_gbz, GbzCurve, GbzOptions, GbzPoint, GridSpec, ScalingFit};
pub use model::{
    bloch_hamiltonian, collapse_energy, example_band_edges, example_gbz_radius, example_model, q_polynomial,
    BlochSample, LatticeModel, LaurentPoly, Mat2, Side, C64,
};
pub use obc::{build_obc_matrix, collapse_eigenvector, obc_spectrum, skin_metrics, ObcChain, SpectrumResult};
pub use polyroots::{char_poly_coeffs, sorted_roots, RootSet};
pub use wannier_stark::{
    monodromy, resonance_forces, wkb_angle, ws_eigenstate, ws_solve, Branch, WkbAngle, WsEigenstate, WsResult,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/gbz.md")]
    mod gbz {}
    #[doc = include_str!("../../../book/src/obc.md")]
    mod obc {}
    #[doc = include_str!("../../../book/src/wannier_stark.md")]
    mod wannier_stark {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/config.md")]
    mod config {}
}
