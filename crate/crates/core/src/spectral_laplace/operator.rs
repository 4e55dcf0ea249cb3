//! Banded finite-difference realisation of the radial Laplacian of one mode.

use serde::{Deserialize, Serialize};

use crate::conifold_model::{Component, ConifoldModel, EndKind, Side, Terminal};
use crate::error::{ConifoldError, Result};
use crate::numerics::banded::Banded;
use crate::weight_calculus::exceptional_roots;
use crate::weighted_calc::RadialGrid;

/// Parity sector at mirror terminals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// The component has no mirror terminal.
    None,
    Even,
    Odd,
}

/// Boundary condition realised at a terminal node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// `u_x = kappa u`; `gamma` is the homogeneity degree it encodes.
    Robin { gamma: f64, kappa: f64 },
    Neumann,
    Dirichlet,
    /// Regular centre where the warp vanishes.
    SmoothCentre,
}

/// Source of the weight that selects the Robin root at truncated ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureWeights {
    /// Each end uses its own weight.
    Model,
    /// Every end uses this weight.
    Constant(f64),
    /// Separate weights for ends on the lower and upper side.
    Sides { lo: f64, hi: f64 },
}

/// Homogeneity degree admissible at weight `beta`: on AC ends the largest root
/// below `beta` (else the decaying root), on CS ends the smallest root above
/// `beta` (else the larger root).
pub fn robin_root(kind: EndKind, beta: f64, m: usize, e: f64) -> f64 {
    let (gp, gm) = exceptional_roots(m, e);
    match kind {
        EndKind::AC => {
            if gp < beta {
                gp
            } else {
                gm
            }
        }
        EndKind::CS => {
            if gm > beta {
                gm
            } else {
                gp
            }
        }
    }
}

/// `du/dx / u` for `u = r^gamma` at end radius `r`.
fn robin_kappa(side: Side, kind: EndKind, gamma: f64, r: f64) -> f64 {
    let sign = match (side, kind) {
        (Side::Lo, EndKind::AC) | (Side::Hi, EndKind::CS) => -1.0,
        _ => 1.0,
    };
    sign * gamma / r
}

pub fn closure_at(
    comp: &Component,
    m: usize,
    side: Side,
    x_edge: f64,
    e: f64,
    parity: Parity,
    weights: ClosureWeights,
) -> Result<Closure> {
    Ok(match comp.terminal(side) {
        Terminal::End(spec) => {
            let beta = match (weights, side) {
                (ClosureWeights::Model, _) => spec.beta,
                (ClosureWeights::Constant(b), _) => b,
                (ClosureWeights::Sides { lo, .. }, Side::Lo) => lo,
                (ClosureWeights::Sides { hi, .. }, Side::Hi) => hi,
            };
            let gamma = robin_root(spec.kind, beta, m, e);
            let r = comp.end_r(side, x_edge).unwrap_or(f64::NAN);
            Closure::Robin { gamma, kappa: robin_kappa(side, spec.kind, gamma, r) }
        }
        Terminal::Cap => {
            if e != 0.0 {
                Closure::Dirichlet
            } else if comp.warp(x_edge).0 == 0.0 {
                Closure::SmoothCentre
            } else {
                Closure::Neumann
            }
        }
        Terminal::Mirror => match parity {
            Parity::Even => Closure::Neumann,
            Parity::Odd => Closure::Dirichlet,
            Parity::None => {
                return Err(ConifoldError::InvalidInput("a mirror terminal needs a parity sector".into()));
            }
        },
    })
}

/// Parity sectors of a component: both mirrors of a two-mirror component share the parity.
pub fn sectors(comp: &Component) -> Vec<Parity> {
    let mirrors = [Side::Lo, Side::Hi].iter().any(|&s| comp.terminal(s) == Terminal::Mirror);
    if mirrors {
        vec![Parity::Even, Parity::Odd]
    } else {
        vec![Parity::None]
    }
}

/// `A u = -u'' - (m-1)(f'/f) u' + (e/f^2) u` on the free nodes of a grid.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    pub e: f64,
    pub parity: Parity,
    pub closures: (Closure, Closure),
    /// Square banded matrix acting on the free nodes.
    pub matrix: Banded,
    /// Grid indices of the unknowns (Dirichlet nodes removed).
    pub free: Vec<usize>,
    pub n_nodes: usize,
}

impl ModeOperator {
    pub fn n(&self) -> usize {
        self.free.len()
    }

    /// Values at free nodes from values at all nodes.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }

    /// Values at all nodes, zero at removed nodes.
    pub fn extend(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_nodes];
        for (k, &i) in self.free.iter().enumerate() {
            out[i] = v[k];
        }
        out
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.matvec(v)
    }

    /// Applies the operator to nodal values, returning values at all nodes (zero at removed nodes).
    pub fn apply_full(&self, full: &[f64]) -> Vec<f64> {
        self.extend(&self.apply(&self.restrict(full)))
    }
}

pub(crate) fn single_component(model: &ConifoldModel) -> Result<&Component> {
    match model.components() {
        [c] => Ok(c),
        cs => Err(ConifoldError::Unsupported(format!(
            "radial solvers handle single-component models, got {}",
            cs.len()
        ))),
    }
}

/// Assembles the mode operator on `grid`.
pub fn assemble_mode_operator(
    model: &ConifoldModel,
    grid: &RadialGrid,
    e: f64,
    parity: Parity,
    weights: ClosureWeights,
) -> Result<ModeOperator> {
    let comp = single_component(model)?;
    let n = grid.len();
    let (x0, x1) = (grid.x[0], grid.x[n - 1]);
    let slack = 1e-12 * (1.0 + x0.abs().max(x1.abs()));
    if n < 5 || x0 < comp.x_lo() - slack || x1 > comp.x_hi() + slack || !x0.is_finite() || !x1.is_finite() {
        return Err(ConifoldError::InvalidInput(format!(
            "grid [{x0}, {x1}] does not fit the component domain [{}, {}]",
            comp.x_lo(),
            comp.x_hi()
        )));
    }
    let m = model.m();
    let lo = closure_at(comp, m, Side::Lo, x0, e, parity, weights)?;
    let hi = closure_at(comp, m, Side::Hi, x1, e, parity, weights)?;
    let h = grid.h;
    let mut full = Banded::zeros(n, n, 1, 1);
    for i in 0..n {
        let x = grid.x[i];
        let (f, fp, _) = comp.warp(x);
        let (xp, xpp) = (grid.dx[i], grid.ddx[i]);
        // -u_xx - (m-1) w u_x = c2 u_ss + c1 u_s
        let c2 = -1.0 / (xp * xp);
        let c1 = xpp / (xp * xp * xp) - (m as f64 - 1.0) * fp / f / xp;
        let lower = c2 / (h * h) - c1 / (2.0 * h);
        let upper = c2 / (h * h) + c1 / (2.0 * h);
        let diag = -2.0 * c2 / (h * h) + if e == 0.0 { 0.0 } else { e / (f * f) };
        if i > 0 && i < n - 1 {
            full.set(i, i - 1, lower);
            full.set(i, i, diag);
            full.set(i, i + 1, upper);
            continue;
        }
        let (closure, inner, ghost) = if i == 0 { (lo, 1, lower) } else { (hi, n - 2, upper) };
        let (interior_coef, sign) = if i == 0 { (upper, -1.0) } else { (lower, 1.0) };
        match closure {
            Closure::Dirichlet => full.set(i, i, 1.0),
            Closure::Neumann => {
                full.set(i, i, diag);
                full.set(i, inner, interior_coef + ghost);
            }
            Closure::Robin { kappa, .. } => {
                // Ghost value u_inner + sign * 2 h X' kappa u_i, with sign -1 at the lower end.
                full.set(i, i, diag + sign * ghost * 2.0 * h * xp * kappa);
                full.set(i, inner, interior_coef + ghost);
            }
            Closure::SmoothCentre => {
                let hx = (grid.x[inner] - x).abs();
                let c = 2.0 * m as f64 / (hx * hx);
                full.set(i, i, c);
                full.set(i, inner, -c);
            }
        }
    }
    let free: Vec<usize> = (0..n)
        .filter(|&i| {
            !((i == 0 && lo == Closure::Dirichlet) || (i == n - 1 && hi == Closure::Dirichlet))
        })
        .collect();
    let mut matrix = full;
    if hi == Closure::Dirichlet {
        matrix = drop_index(&matrix, n - 1);
    }
    if lo == Closure::Dirichlet {
        matrix = drop_index(&matrix, 0);
    }
    Ok(ModeOperator { e, parity, closures: (lo, hi), matrix, free, n_nodes: n })
}

/// Removes row and column `k`.
fn drop_index(b: &Banded, k: usize) -> Banded {
    let mut out = Banded::zeros(b.rows - 1, b.cols - 1, b.kl, b.ku);
    for i in (0..b.rows).filter(|&i| i != k) {
        let ii = if i > k { i - 1 } else { i };
        for j in b.row_range(i).filter(|&j| j != k) {
            let jj = if j > k { j - 1 } else { j };
            out.set(ii, jj, b.get(i, j));
        }
    }
    out
}
