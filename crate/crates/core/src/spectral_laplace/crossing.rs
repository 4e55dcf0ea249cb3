//! New kernel elements appearing when an AC weight crosses an exceptional value.
//!
//! A homogeneous harmonic `r^gamma` on the end is cut off, the error it makes
//! is solved away in a lower weight space where the Laplacian is onto, and
//! the difference is a harmonic function growing like `r^gamma`.

use serde::{Deserialize, Serialize};

use super::forms::{w2_form, weight_diagonal};
use super::operator::{assemble_mode_operator, single_component, ClosureWeights, Parity};
use super::solve::{near_null_threshold, SolverOptions};
use crate::conifold_model::{Component, ConifoldModel, EndKind, Side, Terminal};
use crate::error::{ConifoldError, Result};
use crate::numerics::banded::BandedQr;
use crate::numerics::{fit_line, smoothstep_inf};
use crate::weight_calculus::{classify_weight_region, exceptional_roots, exceptional_weights, ConifoldKind, DEFAULT_TOL};
use crate::weighted_calc::{Mode, ModeFunction, RadialGrid};

/// Allowed excess of the fitted remainder slope over `gamma + nu`.
pub const SLOPE_SLACK: f64 = 0.2;

/// Window in the end radius used for the remainder slope.
pub const SLOPE_WINDOW: (f64, f64) = (10.0, 100.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub gamma: f64,
    pub e: f64,
    pub nu: f64,
    /// Weight of the space the correction is solved in.
    pub beta_low: f64,
    /// Fitted exponent of `|candidate - r^gamma|` on the slope window.
    pub slope: f64,
    /// The remainder is below `h^2 r^gamma`, i.e. zero at grid resolution.
    pub negligible: bool,
    pub slope_bound: f64,
    pub remainder_max: f64,
    /// Weight just above `gamma` at which the candidate is tested.
    pub beta_high: f64,
    /// `||A_h c||_{0, beta_high - 2} / ||c||_{2, beta_high}` for the candidate `c`.
    pub residual: f64,
    pub threshold: f64,
    pub decay_ok: bool,
    pub residual_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingResult {
    pub kernel_candidate: ModeFunction,
    pub decay_report: DecayReport,
}

/// The AC end carrying `r^gamma` (the upper one when both ends are AC).
fn growth_side(comp: &Component) -> Result<Side> {
    let ends = comp.ends();
    if ends.is_empty() || ends.len() > 2 {
        return Err(ConifoldError::InvalidInput("weight crossing needs one or two ends".into()));
    }
    [Side::Hi, Side::Lo]
        .into_iter()
        .find(|&s| comp.end(s).is_some_and(|e| e.kind == EndKind::AC))
        .ok_or_else(|| ConifoldError::InvalidInput("weight crossing needs an AC end".into()))
}

/// Weight just below `gamma` and above `gamma + nu`, clear of exceptional values.
fn lower_weight(comp: &Component, m: usize, gamma: f64, nu: f64) -> Result<f64> {
    let lower = (gamma + nu).max(2.0 - m as f64);
    let next = exceptional_weights(comp.link(), m, (lower, gamma + 1.0))?
        .iter()
        .map(|w| w.gamma)
        .filter(|&g| g > lower + DEFAULT_TOL)
        .fold(gamma, f64::min);
    if !(next > lower) {
        return Err(ConifoldError::WeightConditions(format!("no weight strictly between {lower} and {gamma}")));
    }
    Ok(0.5 * (lower + next))
}

/// Weight midway between `gamma` and the next exceptional value above it.
fn upper_weight(comp: &Component, m: usize, gamma: f64) -> Result<f64> {
    let next = exceptional_weights(comp.link(), m, (gamma, gamma + 2.0))?
        .iter()
        .map(|w| w.gamma)
        .filter(|&g| g > gamma + DEFAULT_TOL)
        .fold(gamma + 2.0, f64::min);
    Ok(0.5 * (gamma + next))
}

/// Discrete residual of `candidate` in the pairing used to detect kernels.
fn pairing_residual(
    model: &ConifoldModel,
    grid: &RadialGrid,
    e: f64,
    parity: Parity,
    side: Side,
    beta: f64,
    candidate: &[f64],
) -> Result<f64> {
    let mb = model.with_constant_beta(beta)?;
    let cb = single_component(&mb)?;
    let m = mb.m();
    let weights = match side {
        Side::Hi => ClosureWeights::Sides { lo: other_beta(cb, m, Side::Lo, beta), hi: beta },
        Side::Lo => ClosureWeights::Sides { lo: beta, hi: other_beta(cb, m, Side::Hi, beta) },
    };
    let op = assemble_mode_operator(&mb, grid, e, parity, weights)?;
    let c = op.restrict(candidate);
    let ac = op.apply(&c);
    let w0 = op.restrict(&weight_diagonal(cb, m, grid, -2.0));
    let num: f64 = ac.iter().zip(&w0).map(|(a, w)| w * a * a).sum();
    let g = w2_form(cb, m, grid, &op)?;
    let den: f64 = c.iter().zip(g.matvec(&c)).map(|(a, b)| a * b).sum();
    Ok((num / den).sqrt())
}

/// Closure weight of the end opposite the growing one: CS ends keep the anchor weight.
fn other_beta(comp: &Component, m: usize, side: Side, beta: f64) -> f64 {
    match comp.end(side).map(|e| e.kind) {
        Some(EndKind::CS) => (2.0 - m as f64) / 2.0,
        _ => beta,
    }
}

/// Checks that the Laplacian is onto at the lower weights; returns the closure weights.
fn surjective_weights(comp: &Component, m: usize, side: Side, beta_low: f64) -> Result<ClosureWeights> {
    let other = match side {
        Side::Hi => Side::Lo,
        Side::Lo => Side::Hi,
    };
    let anchor = (2.0 - m as f64) / 2.0;
    let (kind, weights, other_beta) = match comp.end(other).map(|e| e.kind) {
        None => (ConifoldKind::AC, vec![beta_low], beta_low),
        Some(EndKind::AC) => (ConifoldKind::AC, vec![beta_low, beta_low], beta_low),
        Some(EndKind::CS) => (ConifoldKind::CSAC, vec![anchor, beta_low], anchor),
    };
    let facts = classify_weight_region(kind, &weights, comp.link(), m, DEFAULT_TOL)?;
    if facts.surjective != Some(true) {
        return Err(ConifoldError::WeightConditions(format!(
            "the Laplacian is not known to be onto at weights {weights:?}; refusing the construction"
        )));
    }
    Ok(match side {
        Side::Hi => ClosureWeights::Sides { lo: other_beta, hi: beta_low },
        Side::Lo => ClosureWeights::Sides { lo: beta_low, hi: other_beta },
    })
}

/// Ratio `r_1 / r_0` of the interval `[r_0, r_1]` over which the cutoff rises.
const CUT_RATIO: f64 = 4.0;

/// `(s, s_r, s_rr)` of `chi(r) r^gamma` with `chi` rising over `[R, CUT_RATIO R]`.
fn cut_power(r: f64, big_r: f64, gamma: f64, cut: bool) -> (f64, f64, f64) {
    let p = (r.powf(gamma), gamma * r.powf(gamma - 1.0), gamma * (gamma - 1.0) * r.powf(gamma - 2.0));
    if !cut {
        return p;
    }
    if r <= big_r {
        return (0.0, 0.0, 0.0);
    }
    let l2 = CUT_RATIO.ln();
    let (c, c1, c2) = smoothstep_inf((r / big_r).ln() / l2);
    let cr = c1 / (r * l2);
    let crr = c2 / (r * l2).powi(2) - c1 / (r * r * l2);
    (c * p.0, cr * p.0 + c * p.1, crr * p.0 + 2.0 * cr * p.1 + c * p.2)
}

/// Builds `sigma - u_sigma` for `sigma = r^gamma` in mode `e` on the AC end of `model`.
pub fn weight_crossing_kernel(model: &ConifoldModel, gamma: f64, e: f64, opts: &SolverOptions) -> Result<CrossingResult> {
    let comp = single_component(model)?;
    let m = model.m();
    if comp.link().multiplicity_of(e, 1e-9).is_none() {
        return Err(ConifoldError::InvalidInput(format!("{e} is not an eigenvalue of {}", comp.link().label())));
    }
    let (gp, gm) = exceptional_roots(m, e);
    if (gamma - gp).abs() > 1e-9 && (gamma - gm).abs() > 1e-9 {
        return Err(ConifoldError::InvalidInput(format!("{gamma} is not exceptional for eigenvalue {e}")));
    }
    let side = growth_side(comp)?;
    let spec = comp.end(side).expect("growth side has an end");
    let beta_low = lower_weight(comp, m, gamma, spec.nu)?;
    let weights = surjective_weights(comp, m, side, beta_low)?;

    let grid = RadialGrid::for_component(comp, &opts.grid)?;
    let n = grid.len();
    // An exact cone without caps or mirrors carries r^gamma globally.
    let global = comp.profile().is_exact_cone()
        && [Side::Lo, Side::Hi].iter().all(|&s| matches!(comp.terminal(s), Terminal::End(_)));
    let d = (m - 1) as f64;
    let dir = match side {
        Side::Hi => 1.0,
        Side::Lo => -1.0,
    };
    let mut sigma = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let x = grid.x[i];
        let r = comp.end_r(side, x).unwrap_or(f64::NAN);
        if !(r > 0.0) {
            continue;
        }
        let (s, sr, srr) = cut_power(r, spec.boundary, gamma, !global);
        let (f, fp, _) = comp.warp(x);
        sigma[i] = s;
        rhs[i] = -srr - d * fp / f * dir * sr + e * s / (f * f);
    }

    let parity = if [Side::Lo, Side::Hi].iter().any(|&s| comp.terminal(s) == Terminal::Mirror) {
        Parity::Even
    } else {
        Parity::None
    };
    let op = assemble_mode_operator(model, &grid, e, parity, weights)?;
    let u = if rhs.iter().all(|&v| v == 0.0) {
        vec![0.0; n]
    } else {
        op.extend(&BandedQr::new(&op.matrix).solve_least_squares(&op.restrict(&rhs)))
    };
    let candidate: Vec<f64> = sigma.iter().zip(&u).map(|(s, v)| s - v).collect();

    // Remainder candidate - r^gamma on the slope window, where the cutoff equals one.
    let (mut lr, mut lu) = (Vec::new(), Vec::new());
    let mut remainder_max = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        let r = comp.end_r(side, grid.x[i]).unwrap_or(f64::NAN);
        if r >= SLOPE_WINDOW.0 && r <= SLOPE_WINDOW.1 {
            let rem = (candidate[i] - r.powf(gamma)).abs();
            remainder_max = remainder_max.max(rem);
            scale = scale.max(r.powf(gamma));
            if rem > 0.0 {
                lr.push(r.ln());
                lu.push(rem.ln());
            }
        }
    }
    if scale == 0.0 {
        return Err(ConifoldError::InvalidInput("the grid does not reach the slope window".into()));
    }
    let negligible = remainder_max <= grid.h * grid.h * scale;
    let slope = if lr.len() < 2 { f64::NEG_INFINITY } else { fit_line(&lr, &lu).0 };

    let beta_high = upper_weight(comp, m, gamma)?;
    let residual = pairing_residual(model, &grid, e, parity, side, beta_high, &candidate)?;
    let threshold = near_null_threshold(comp.link(), m, opts.max_eigenvalue, grid.h)?;
    let slope_bound = gamma + spec.nu + SLOPE_SLACK;
    let decay_report = DecayReport {
        gamma,
        e,
        nu: spec.nu,
        beta_low,
        slope,
        negligible,
        slope_bound,
        remainder_max,
        beta_high,
        residual,
        threshold,
        decay_ok: negligible || slope <= slope_bound,
        residual_ok: residual < threshold,
    };
    let kernel_candidate = ModeFunction::single(0, grid, vec![Mode { e, values: candidate }]);
    Ok(CrossingResult { kernel_candidate, decay_report })
}
