//! Discrete weighted quadratic forms at `p = 2`.

use crate::conifold_model::Component;
use crate::error::{ConifoldError, Result};
use crate::numerics::banded::Banded;
use crate::weighted_calc::RadialGrid;

use super::operator::ModeOperator;

/// Start index and coefficients of the first and second derivative stencils at node `i`,
/// matching [`RadialGrid::derivatives`].
pub fn derivative_stencil(grid: &RadialGrid, i: usize) -> (usize, [f64; 4], [f64; 4]) {
    let n = grid.len();
    let h = grid.h;
    let (start, s1, s2): (usize, [f64; 4], [f64; 4]) = if i == 0 {
        (0, [-1.5 / h, 2.0 / h, -0.5 / h, 0.0], [2.0, -5.0, 4.0, -1.0].map(|c| c / (h * h)))
    } else if i == n - 1 {
        (n - 4, [0.0, 0.5 / h, -2.0 / h, 1.5 / h], [-1.0, 4.0, -5.0, 2.0].map(|c| c / (h * h)))
    } else {
        (i - 1, [-0.5 / h, 0.0, 0.5 / h, 0.0], [1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h), 0.0])
    };
    let (xp, xpp) = (grid.dx[i], grid.ddx[i]);
    let d1 = s1.map(|c| c / xp);
    let mut d2 = [0.0; 4];
    for k in 0..4 {
        d2[k] = (s2[k] - xpp / xp * s1[k]) / (xp * xp);
    }
    (start, d1, d2)
}

/// `W_i = q_i w^2 rho^-m f^(m-1)` at every node, with `w = weight(x, shift)`.
pub fn weight_diagonal(comp: &Component, m: usize, grid: &RadialGrid, shift: f64) -> Vec<f64> {
    grid.x
        .iter()
        .zip(&grid.q)
        .map(|(&x, &q)| {
            let w = comp.weight(x, shift);
            q * w * w * comp.rho(x).powi(-(m as i32)) * comp.warp(x).0.powi(m as i32 - 1)
        })
        .collect()
}

/// Symmetric 3x3 form in `(u, u', u'')` realising the integrand of `||u sigma_e||^2_{W_{2,beta}}`
/// per unit `q w^2 rho^-m f^(m-1)`.
fn w2_block(rho: f64, f: f64, fp: f64, e: f64, kappa: f64, d: f64) -> [[f64; 3]; 3] {
    let (r2, r4) = (rho * rho, rho.powi(4));
    let f2 = f * f;
    let w = fp / f;
    let o00 = 1.0 + r2 * e / f2 + r4 * (2.0 * e * w * w / f2 + (e * e - kappa * e) / (f2 * f2));
    let o01 = r4 * (-2.0 * e * w / f2 - e * fp / (f2 * f));
    let o11 = r2 + r4 * (2.0 * e / f2 + d * fp * fp / f2);
    [[o00, o01, 0.0], [o01, o11, 0.0], [0.0, 0.0, r4]]
}

/// Banded matrix of `||u||^2_{W_{2,beta}}` for one mode on the free nodes of `op`.
pub fn w2_form(comp: &Component, m: usize, grid: &RadialGrid, op: &ModeOperator) -> Result<Banded> {
    let e = op.e;
    let kappa = if e == 0.0 {
        0.0
    } else {
        comp.link().einstein_constant().ok_or_else(|| {
            ConifoldError::Unsupported(format!("second-order norms on {} need its Einstein constant", comp.link().label()))
        })?
    };
    let wd = weight_diagonal(comp, m, grid, 0.0);
    let n = grid.len();
    let d = (m - 1) as f64;
    let mut full = Banded::zeros(n, n, 3, 3);
    for i in 0..n {
        let x = grid.x[i];
        let (f, fp, _) = comp.warp(x);
        let blk = w2_block(comp.rho(x), f, fp, e, kappa, d);
        let (start, d1, d2) = derivative_stencil(grid, i);
        // Rows of J_i: value, first and second derivative, as (column, coefficient) lists.
        let mut rows: [[(usize, f64); 4]; 3] = [[(i, 0.0); 4]; 3];
        rows[0][0] = (i, 1.0);
        for k in 0..4 {
            rows[1][k] = (start + k, d1[k]);
            rows[2][k] = (start + k, d2[k]);
        }
        for a in 0..3 {
            for b in 0..3 {
                let c = wd[i] * blk[a][b];
                if c == 0.0 {
                    continue;
                }
                for &(ja, va) in &rows[a] {
                    if va == 0.0 {
                        continue;
                    }
                    for &(jb, vb) in &rows[b] {
                        if vb != 0.0 {
                            full.add(ja, jb, c * va * vb);
                        }
                    }
                }
            }
        }
    }
    Ok(restrict_sym(&full, &op.free))
}

/// Principal submatrix on `keep` (sorted, contiguous up to removed endpoints).
pub fn restrict_sym(b: &Banded, keep: &[usize]) -> Banded {
    let off = keep[0];
    let n = keep.len();
    let mut out = Banded::zeros(n, n, b.kl, b.ku);
    for (ii, &i) in keep.iter().enumerate() {
        for j in b.row_range(i) {
            if j < off || j - off >= n {
                continue;
            }
            out.set(ii, j - off, b.get(i, j));
        }
    }
    out
}
