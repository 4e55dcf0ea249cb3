//! Weighted norms of functions on model conifolds.
//!
//! Functions are stored as radial coefficients of link eigenfunctions on a
//! [`RadialGrid`]. At `p = 2` the angular integrals are done exactly from the
//! eigenvalues; other exponents and products sample one representative
//! eigenfunction per eigenvalue on the link.

pub mod angular;
pub mod family;
pub mod grid;
pub mod norms;

pub use family::{bump_family, member_centre_x, random_bumps, scale_coordinate, FamilyOptions};
pub use grid::{GridOptions, RadialGrid, RegionLabel};
pub use norms::{
    banach_algebra_check, embedding_constant_estimate, gns_constant_estimate, holder_check, pointwise_sobolev_norm,
    rescaling_invariance_check, sobolev_exponent, weighted_ck_norm, weighted_sobolev_norm, weighted_sobolev_report,
    AlgebraReport, BetaChoice, CkReport, HolderReport, Mode, ModeFunction, NormReport, Piece, RatioReport, WeightSpec,
};
