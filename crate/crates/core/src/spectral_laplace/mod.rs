//! Per-mode radial discretisation of the Laplacian and its extremal constants.
//!
//! Each link eigenvalue `e` gives a radial operator
//! `A u = -u'' - (m-1)(f'/f) u' + (e/f^2) u`, assembled by central differences
//! in the mesh coordinate of the component. Constants are generalized
//! eigenvalues of symmetric pencils built from the weighted forms.

mod crossing;
mod forms;
mod operator;
mod solve;

use serde::{Deserialize, Serialize};

use crate::error::{ConifoldError, Result};
use crate::link_spectra::Link;
use crate::weight_calculus::exceptional_roots;

pub use crossing::{weight_crossing_kernel, CrossingResult, DecayReport, SLOPE_SLACK, SLOPE_WINDOW};
pub use forms::{derivative_stencil, w2_form, weight_diagonal};
pub use operator::{assemble_mode_operator, closure_at, robin_root, sectors, Closure, ClosureWeights, ModeOperator, Parity};
pub use solve::{
    check_invertibility_weights, check_poincare_weights, cone_consistency_residual, invertibility_constant,
    invertibility_constant_on, kernel_dimension_scan, near_null_threshold, poincare_constant,
    restricted_invertibility_compact, CompactOptions, CompactReport, InvertibilityReport, KernelRow, ModeResult,
    PoincareReport, SolverOptions, NEAR_EXCEPTIONAL,
};

/// Homogeneity degrees of the harmonic functions `r^gamma sigma` on the cone over a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicBasis {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub mult: u64,
}

pub fn harmonic_basis_cone(link: &Link, m: usize, e: f64) -> Result<HarmonicBasis> {
    if link.dim() + 1 != m {
        return Err(ConifoldError::InvalidInput(format!("link dimension {} does not match m = {m}", link.dim())));
    }
    let mult = link
        .multiplicity_of(e, 1e-9)
        .ok_or_else(|| ConifoldError::InvalidInput(format!("{e} is not an eigenvalue of {}", link.label())))?;
    let (gamma_plus, gamma_minus) = exceptional_roots(m, e);
    Ok(HarmonicBasis { gamma_plus, gamma_minus, mult })
}
