//! Weighted Sobolev calculus on warped-product conifolds, their t-parametrised
//! connect sums, and per-mode radial solvers for the Laplacian.
//!
//! Links enter only through their Laplace spectra, so every computation
//! reduces to one-dimensional radial problems indexed by link eigenvalues.

pub mod error;
pub mod link_spectra;
pub mod numerics;
pub mod conifold_model;
pub mod weight_calculus;
pub mod weighted_calc;
pub mod spectral_laplace;
pub mod experiments;

pub use error::{ConifoldError, Result};
