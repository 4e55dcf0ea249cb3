//! Extremal constants of the discrete weighted pencils.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forms::{weight_diagonal, w2_form};
use super::operator::{assemble_mode_operator, sectors, single_component, ClosureWeights, ModeOperator, Parity};
use crate::conifold_model::{cutoff_eta, Component, ConifoldModel, EndKind, Side, Terminal};
use crate::error::{ConifoldError, Result};
use crate::numerics::banded::{Banded, BandedQr, SymTridiagLdl};
use crate::numerics::lanczos::{dot, lanczos_largest, LanczosOptions};
use crate::weight_calculus::{exceptional_set, DEFAULT_TOL};
use crate::weighted_calc::{GridOptions, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub grid: GridOptions,
    /// Modes with link eigenvalue up to this value are solved.
    pub max_eigenvalue: f64,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { grid: GridOptions::default(), max_eigenvalue: 40.0, max_iter: 400, rel_tol: 1e-9, seed: 0x5eed }
    }
}

impl SolverOptions {
    fn lanczos(&self) -> LanczosOptions {
        LanczosOptions { nev: 2, max_iter: self.max_iter, rel_tol: self.rel_tol, seed: self.seed }
    }
}

/// Per-mode extremal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub e: f64,
    pub mult: u64,
    pub parity: Parity,
    pub sigma_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertibilityReport {
    pub model: String,
    pub t: Option<f64>,
    pub betas: Vec<f64>,
    pub grid_size: usize,
    pub sigma_min: f64,
    pub constant: f64,
    pub modes: Vec<ModeResult>,
    pub warnings: Vec<String>,
}

/// Distance to an exceptional weight below which a warning is attached.
pub const NEAR_EXCEPTIONAL: f64 = 1e-2;

pub(crate) fn glue_t(comp: &Component) -> Option<f64> {
    comp.glue().map(|g| g.t)
}

fn end_betas(model: &ConifoldModel) -> Vec<f64> {
    model.ends().iter().map(|e| e.spec.beta).collect()
}

/// Weights checked against the exceptional set of the link: errors within
/// `DEFAULT_TOL`, warnings within [`NEAR_EXCEPTIONAL`].
fn exceptional_screen(comp: &Component, m: usize, labelled: &[(usize, f64)]) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    for &(end, beta) in labelled {
        let set = exceptional_set(comp.link(), m, (beta - 1.0, beta + 1.0), end)?;
        for w in &set.weights {
            let d = (w.gamma - beta).abs();
            if d <= DEFAULT_TOL {
                return Err(ConifoldError::ExceptionalWeight { end, beta, gamma: w.gamma, tol: DEFAULT_TOL });
            }
            if d < NEAR_EXCEPTIONAL {
                warnings.push(format!("weight {beta} of end {end} is within {d:.1e} of exceptional weight {}", w.gamma));
            }
        }
    }
    Ok(warnings)
}

/// Conditions for uniform invertibility on a family with ends: at least one
/// end, AC weights negative, CS weights above `2 - m`, nothing exceptional.
pub fn check_invertibility_weights(model: &ConifoldModel) -> Result<Vec<String>> {
    let comp = single_component(model)?;
    let m = model.m();
    let ends = model.ends();
    if ends.is_empty() {
        return Err(ConifoldError::WeightConditions(
            "invertibility needs at least one end; use the compact solver for closed models".into(),
        ));
    }
    let two_m = 2.0 - m as f64;
    for (i, e) in ends.iter().enumerate() {
        let ok = match e.spec.kind {
            EndKind::AC => e.spec.beta < 0.0,
            EndKind::CS => e.spec.beta > two_m,
        };
        if !ok {
            return Err(ConifoldError::WeightConditions(format!(
                "end {i} ({:?}) has weight {}; need AC weights < 0 and CS weights > {two_m}",
                e.spec.kind, e.spec.beta
            )));
        }
    }
    let mut labelled: Vec<(usize, f64)> = ends.iter().enumerate().map(|(i, e)| (i, e.spec.beta)).collect();
    if let Some(g) = comp.glue() {
        labelled.push((ends.len(), g.beta_neck));
    }
    exceptional_screen(comp, m, &labelled)
}

/// Modes `(e, mult)` with `e <= max_e`, crossed with the parity sectors.
fn mode_list(comp: &Component, max_e: f64) -> Vec<(f64, u64, Parity)> {
    let mut out = Vec::new();
    for (e, mult) in comp.link().eigenvalues_below(max_e) {
        for p in sectors(comp) {
            out.push((e, mult, p));
        }
    }
    out
}

/// Smallest generalised singular value of `A` between `W_{2,beta}` and `W_{0,beta-2}` on one mode.
///
/// With `constraint = Some(c)` the minimum runs over `c . u = 0`, which
/// requires constants to lie in the kernel of `A`.
pub fn pencil_sigma_min(
    comp: &Component,
    m: usize,
    grid: &RadialGrid,
    op: &ModeOperator,
    constraint: Option<&[f64]>,
    lanczos: LanczosOptions,
) -> Result<f64> {
    let g = w2_form(comp, m, grid, op)?;
    let w0 = op.restrict(&weight_diagonal(comp, m, grid, -2.0));
    let n = op.n();
    let dscale: Vec<f64> = g.diagonal().iter().map(|d| 1.0 / d.sqrt()).collect();
    let rows: Vec<f64> = w0.iter().map(|w| w.sqrt()).collect();
    if dscale.iter().chain(&rows).any(|v| !v.is_finite()) {
        return Err(ConifoldError::NonFinite("weighted form".into()));
    }
    let b = op.matrix.scaled(Some(&rows), Some(&dscale));
    let gs = g.scaled(Some(&dscale), Some(&dscale));
    let lam = match constraint {
        None => {
            let qr = BandedQr::new(&b);
            let top = lanczos_largest(n, |v| qr.solve_normal(&gs.matvec(v)), |v| gs.matvec(v), lanczos);
            top[0]
        }
        Some(c) => constrained_top(op, &b, &gs, &dscale, c, lanczos)?,
    };
    Ok(if lam > 0.0 { 1.0 / lam.sqrt() } else { f64::INFINITY })
}

/// Largest eigenvalue of the pencil restricted to `c . u = 0`.
///
/// `u = P v` with `P = I - 1 c^T / (c . 1)` and `v_0 = 0`; since `A 1 = 0`,
/// `A u = A v`.
fn constrained_top(op: &ModeOperator, b: &Banded, gs: &Banded, dscale: &[f64], c: &[f64], lanczos: LanczosOptions) -> Result<f64> {
    let n = op.n();
    let ones = vec![1.0; n];
    let a1 = op.apply(&ones);
    let amax = op.matrix.diagonal().iter().fold(0.0f64, |a, d| a.max(d.abs()));
    if a1.iter().any(|v| v.abs() > 1e-8 * amax) {
        return Err(ConifoldError::InvalidInput("constraint transverse to constants needs A 1 = 0".into()));
    }
    let c1: f64 = c.iter().sum();
    if c1 == 0.0 {
        return Err(ConifoldError::InvalidInput("constraint functional vanishes on constants".into()));
    }
    // Work in scaled unknowns y = D^-1 v; pinned first entry.
    let bp = b.without_column(0);
    let qr = BandedQr::new(&bp);
    let lift = |y: &[f64]| -> Vec<f64> {
        // u = P D [0, y]
        let mut v = vec![0.0; n];
        for k in 1..n {
            v[k] = dscale[k] * y[k - 1];
        }
        let cv = dot(c, &v) / c1;
        v.iter().map(|x| x - cv).collect()
    };
    let lift_t = |z: &[f64]| -> Vec<f64> {
        // D P^T z restricted to entries 1..n
        let s: f64 = z.iter().sum::<f64>() / c1;
        (1..n).map(|k| dscale[k] * (z[k] - c[k] * s)).collect()
    };
    // Unscaled G from the scaled one: G = D^-1 Gs D^-1.
    let gmul = |u: &[f64]| -> Vec<f64> {
        let us: Vec<f64> = u.iter().zip(dscale).map(|(a, d)| a / d).collect();
        gs.matvec(&us).iter().zip(dscale).map(|(a, d)| a / d).collect()
    };
    let mform = |y: &[f64]| lift_t(&gmul(&lift(y)));
    let top = lanczos_largest(n - 1, |y| qr.solve_normal(&mform(y)), mform, lanczos);
    Ok(top[0])
}

fn solve_modes<F>(comp: &Component, max_e: f64, f: F) -> Result<Vec<ModeResult>>
where
    F: Fn(f64, u64, Parity) -> Result<f64> + Sync,
{
    let modes = mode_list(comp, max_e);
    modes
        .par_iter()
        .map(|&(e, mult, parity)| Ok(ModeResult { e, mult, parity, sigma_min: f(e, mult, parity)? }))
        .collect()
}

/// `C = 1 / sigma_min` over the modes with `e <= max_eigenvalue`, on a given grid.
pub fn invertibility_constant_on(model: &ConifoldModel, grid: &RadialGrid, opts: &SolverOptions) -> Result<InvertibilityReport> {
    let warnings = check_invertibility_weights(model)?;
    let comp = single_component(model)?;
    let m = model.m();
    let modes = solve_modes(comp, opts.max_eigenvalue, |e, _, parity| {
        let op = assemble_mode_operator(model, grid, e, parity, ClosureWeights::Model)?;
        pencil_sigma_min(comp, m, grid, &op, None, opts.lanczos())
    })?;
    let sigma_min = modes.iter().map(|r| r.sigma_min).fold(f64::INFINITY, f64::min);
    Ok(InvertibilityReport {
        model: model.name.clone(),
        t: glue_t(comp),
        betas: end_betas(model),
        grid_size: grid.len(),
        sigma_min,
        constant: 1.0 / sigma_min,
        modes,
        warnings,
    })
}

pub fn invertibility_constant(model: &ConifoldModel, opts: &SolverOptions) -> Result<InvertibilityReport> {
    let grid = RadialGrid::for_component(single_component(model)?, &opts.grid)?;
    invertibility_constant_on(model, &grid, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactReport {
    pub model: String,
    pub t: Option<f64>,
    pub grid_size: usize,
    /// Mode-0 minimum without the constraint (zero up to roundoff: constants).
    pub unconstrained_mode0: f64,
    /// Minimum over all modes with mode 0 constrained.
    pub constrained: f64,
    pub modes: Vec<ModeResult>,
}

/// Region `K` and cutoff exponents for the constraint transverse to constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompactOptions {
    pub core: (f64, f64),
    pub cut_a: f64,
    pub cut_b: f64,
}

impl Default for CompactOptions {
    fn default() -> Self {
        use crate::conifold_model::presets;
        CompactOptions { core: presets::SPINDLE_CORE, cut_a: presets::CUT_A, cut_b: presets::CUT_B }
    }
}

/// Minimum of `||A u|| / ||u||` over `{u : int_K eta_t u vol = 0}` (mode 0) and all other modes.
pub fn restricted_invertibility_compact(
    model: &ConifoldModel,
    copts: &CompactOptions,
    opts: &SolverOptions,
) -> Result<CompactReport> {
    let comp = single_component(model)?;
    if !model.is_compact() {
        return Err(ConifoldError::InvalidInput("the constrained solver needs a compact model".into()));
    }
    let m = model.m();
    if let Some(g) = comp.glue() {
        let two_m = 2.0 - m as f64;
        if !(g.beta_neck > two_m && g.beta_neck < 0.0) {
            return Err(ConifoldError::WeightConditions(format!(
                "compact invertibility needs a constant weight in ({two_m}, 0), got {}",
                g.beta_neck
            )));
        }
        exceptional_screen(comp, m, &[(0, g.beta_neck)])?;
    }
    let grid = RadialGrid::for_component(comp, &opts.grid)?;
    let eta = match comp.glue() {
        Some(g) => Some(cutoff_eta(g.t, copts.cut_a, copts.cut_b)?),
        None => None,
    };
    let (k0, k1) = copts.core;
    let c_full: Vec<f64> = grid
        .x
        .iter()
        .zip(&grid.q)
        .map(|(&x, &q)| {
            if x < k0 || x > k1 {
                return 0.0;
            }
            let et = eta.map_or(1.0, |c| if x > 0.0 { c.eval(x).0 } else { 0.0 });
            q * et * comp.warp(x).0.powi(m as i32 - 1)
        })
        .collect();
    if c_full.iter().all(|c| *c == 0.0) {
        return Err(ConifoldError::InvalidInput(format!("core region [{k0}, {k1}] contains no grid nodes")));
    }
    let free_sector = |e: f64, parity: Parity| e == 0.0 && parity != Parity::Odd;
    let modes = solve_modes(comp, opts.max_eigenvalue, |e, _, parity| {
        let op = assemble_mode_operator(model, &grid, e, parity, ClosureWeights::Model)?;
        if free_sector(e, parity) {
            let c = op.restrict(&c_full);
            pencil_sigma_min(comp, m, &grid, &op, Some(&c), opts.lanczos())
        } else {
            pencil_sigma_min(comp, m, &grid, &op, None, opts.lanczos())
        }
    })?;
    let unconstrained_mode0 = {
        let parity = sectors(comp)[0];
        let op = assemble_mode_operator(model, &grid, 0.0, parity, ClosureWeights::Model)?;
        pencil_sigma_min(comp, m, &grid, &op, None, opts.lanczos())?
    };
    Ok(CompactReport {
        model: model.name.clone(),
        t: glue_t(comp),
        grid_size: grid.len(),
        unconstrained_mode0,
        constrained: modes.iter().map(|r| r.sigma_min).fold(f64::INFINITY, f64::min),
        modes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub model: String,
    pub t: Option<f64>,
    pub grid_size: usize,
    pub constant: f64,
    /// Per-mode `C_n` (stored in `sigma_min`).
    pub modes: Vec<ModeResult>,
}

/// Constants must not lie in the space: some AC weight below 0 or CS weight above 0;
/// on a connect sum the marked weight is negative.
pub fn check_poincare_weights(model: &ConifoldModel) -> Result<()> {
    let comp = single_component(model)?;
    let ends = model.ends();
    let excludes_constants = ends.iter().any(|e| match e.spec.kind {
        EndKind::AC => e.spec.beta < 0.0,
        EndKind::CS => e.spec.beta > 0.0,
    });
    if !excludes_constants {
        return Err(ConifoldError::WeightConditions(
            "constants lie in W_{1,beta}: the Poincaré ratio is infinite".into(),
        ));
    }
    if let Some(g) = comp.glue() {
        if g.beta_neck >= 0.0 {
            return Err(ConifoldError::WeightConditions(format!("marked weight {} must be negative", g.beta_neck)));
        }
    }
    Ok(())
}

/// `C = max ||u||_{W_{1,beta}} / ||du||_{L_{beta-1}}`, zero boundary values at truncated ends.
pub fn poincare_constant(model: &ConifoldModel, opts: &SolverOptions) -> Result<PoincareReport> {
    check_poincare_weights(model)?;
    let comp = single_component(model)?;
    let grid = RadialGrid::for_component(comp, &opts.grid)?;
    let m = model.m();
    let modes = solve_modes(comp, opts.max_eigenvalue, |e, _, parity| {
        poincare_mode(comp, m, &grid, e, parity, opts.lanczos())
    })?;
    Ok(PoincareReport {
        model: model.name.clone(),
        t: glue_t(comp),
        grid_size: grid.len(),
        constant: modes.iter().map(|r| r.sigma_min).fold(0.0, f64::max),
        modes,
    })
}

fn dirichlet_at(comp: &Component, side: Side, e: f64, parity: Parity) -> bool {
    match comp.terminal(side) {
        Terminal::End(_) => true,
        Terminal::Cap => e != 0.0,
        Terminal::Mirror => parity == Parity::Odd,
    }
}

fn poincare_mode(comp: &Component, m: usize, grid: &RadialGrid, e: f64, parity: Parity, lanczos: LanczosOptions) -> Result<f64> {
    let n = grid.len();
    let dens = |x: f64, shift: f64| {
        let w = comp.weight(x, shift);
        w * w * comp.rho(x).powi(-(m as i32)) * comp.warp(x).0.powi(m as i32 - 1)
    };
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let (xa, xb) = (grid.x[i], grid.x[i + 1]);
        let k = dens(0.5 * (xa + xb), -1.0) / (xb - xa);
        diag[i] += k;
        diag[i + 1] += k;
        off[i] -= k;
    }
    let mut mass = vec![0.0; n];
    for i in 0..n {
        let x = grid.x[i];
        if e != 0.0 {
            diag[i] += grid.q[i] * dens(x, -1.0) * e / comp.warp(x).0.powi(2);
        }
        mass[i] = grid.q[i] * dens(x, 0.0);
    }
    let lo = usize::from(dirichlet_at(comp, Side::Lo, e, parity));
    let hi = n - usize::from(dirichlet_at(comp, Side::Hi, e, parity));
    let (d, o, w) = (&diag[lo..hi], &off[lo..hi - 1], &mass[lo..hi]);
    let ldl = SymTridiagLdl::new(d, o)
        .ok_or_else(|| ConifoldError::InvalidInput("gradient form is not positive definite".into()))?;
    let hmul = |v: &[f64]| -> Vec<f64> {
        (0..v.len())
            .map(|i| {
                d[i] * v[i] + if i > 0 { o[i - 1] * v[i - 1] } else { 0.0 } + if i + 1 < v.len() { o[i] * v[i + 1] } else { 0.0 }
            })
            .collect()
    };
    let top = lanczos_largest(
        d.len(),
        |v| ldl.solve(&v.iter().zip(w).map(|(a, b)| a * b).collect::<Vec<_>>()),
        hmul,
        lanczos,
    );
    Ok((1.0 + top[0].max(0.0)).sqrt())
}

/// Maximum over modes of the scaled residual `|A r^gamma_+| r^(2 - gamma_+)` of sampled
/// cone harmonics on `r in [1, e]` with log-spacing `h`.
pub fn cone_consistency_residual(link: &crate::link_spectra::Link, m: usize, e: f64, gamma: f64, h: f64) -> Result<f64> {
    use crate::conifold_model::{EndSpec, MeshMap, Profile};
    let comp = Component::new(
        link.clone(),
        Terminal::End(EndSpec::cs(1.0, 0.5, 1.0)),
        Terminal::End(EndSpec::ac(-1.0, -0.5, 1.0)),
        0.0,
        f64::INFINITY,
        Profile::ExactCone,
    )?;
    let model = ConifoldModel::new("cone", m, vec![comp])?;
    let cells = ((1.0 / h).round() as usize).max(8);
    let grid = RadialGrid::from_mesh(MeshMap::Exp { x0: 0.0, s: 1.0 }, 0.0, 1.0, cells)?;
    let op = assemble_mode_operator(&model, &grid, e, Parity::None, ClosureWeights::Model)?;
    let u: Vec<f64> = grid.x.iter().map(|r| r.powf(gamma)).collect();
    let au = op.apply(&op.restrict(&u));
    Ok((1..grid.len() - 1)
        .map(|i| (au[i] * grid.x[i].powf(2.0 - gamma)).abs())
        .fold(0.0, f64::max))
}

/// Ten times the largest cone-harmonic residual over the modes, at spacing `h`.
pub fn near_null_threshold(link: &crate::link_spectra::Link, m: usize, max_e: f64, h: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for (e, _) in link.eigenvalues_below(max_e) {
        let (gp, _) = crate::weight_calculus::exceptional_roots(m, e);
        worst = worst.max(cone_consistency_residual(link, m, e, gp, h)?);
    }
    Ok(10.0 * worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub beta: f64,
    pub dim: u64,
    pub threshold: f64,
    /// Some singular value lies within a factor 10 of the threshold.
    pub ambiguous: bool,
    pub modes: Vec<ModeResult>,
}

/// Counts near-null singular values (with multiplicity) per weight on an AC model.
pub fn kernel_dimension_scan(model: &ConifoldModel, betas: &[f64], opts: &SolverOptions) -> Result<Vec<KernelRow>> {
    let comp = single_component(model)?;
    let ends = model.ends();
    if ends.is_empty() || ends.iter().any(|e| e.spec.kind != EndKind::AC) {
        return Err(ConifoldError::InvalidInput("kernel scan needs a model whose ends are all AC".into()));
    }
    let m = model.m();
    let grid = RadialGrid::for_component(comp, &opts.grid)?;
    let threshold = near_null_threshold(comp.link(), m, opts.max_eigenvalue, grid.h)?;
    betas
        .iter()
        .map(|&beta| {
            exceptional_screen(comp, m, &[(0, beta)])?;
            let mb = model.with_constant_beta(beta)?;
            let cb = single_component(&mb)?;
            let modes = solve_modes(cb, opts.max_eigenvalue, |e, _, parity| {
                let op = assemble_mode_operator(&mb, &grid, e, parity, ClosureWeights::Model)?;
                pencil_sigma_min(cb, m, &grid, &op, None, opts.lanczos())
            })?;
            let dim = modes.iter().filter(|r| r.sigma_min < threshold).map(|r| r.mult).sum();
            let ambiguous = modes.iter().any(|r| r.sigma_min >= 0.1 * threshold && r.sigma_min <= 10.0 * threshold);
            Ok(KernelRow { beta, dim, threshold, ambiguous, modes })
        })
        .collect()
}
