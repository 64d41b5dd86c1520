//! Circuit complexity of Bose-Hubbard ground states in the spin-wave
//! (quadratic fluctuation) approximation around the mean-field state.
//!
//! The pipeline runs [`onsite`] (self-consistent order parameter) →
//! [`quadratic`] (per-momentum blocks) → [`bogoliubov`] (frequencies and
//! squeezing angles) → [`complexity`] (Brillouin-zone sums). [`scaling`]
//! fits the near-critical behaviour, [`gaussian_ref`] and [`holo`] provide
//! analytic references and [`exact_oracle`] brute-force checks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bogoliubov;
pub mod cli;
pub mod complexity;
pub mod error;
pub mod exact_oracle;
pub mod gaussian_ref;
pub mod holo;
pub mod lattice;
pub mod onsite;
pub mod optimize;
pub mod quadratic;
pub mod quadrature;
pub mod scaling;

pub use error::{Error, Result};
