//! Density-operator quantum mechanics on finite-dimensional Hilbert spaces.
//!
//! The crate is layered bottom-up:
//!
//! - [`operator`]: Hermitian operators, spectral decompositions, projectors,
//!   commutators and unitary exponentials;
//! - [`density`]: density operators, mixtures, and decomposition
//!   non-uniqueness;
//! - [`measurement`]: expectation values, variances, outcome distributions,
//!   uncertainty products, and tomography from expectation values;
//! - [`models`]: grid systems (ring and hard-wall well), spin multiplets and
//!   Gaussian packets;
//! - [`dynamics`]: unitary evolution for constant and time-dependent
//!   Hamiltonians;
//! - [`ensembles`]: sampled measurement records and homogeneity tests;
//! - [`demos`]: end-to-end demonstrations with CSV/JSON reports.

pub mod demos;
pub mod density;
pub mod dynamics;
pub mod eigen;
pub mod ensembles;
pub mod error;
pub mod matrix;
pub mod measurement;
pub mod models;
pub mod operator;
pub mod rng;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
