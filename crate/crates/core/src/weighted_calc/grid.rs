//! Radial grids uniform in a mapped coordinate `xi`.

use serde::{Deserialize, Serialize};

use crate::conifold_model::{Component, EndKind, MeshMap, Side};
use crate::error::{ConifoldError, Result};

/// Default truncation radii for AC and CS ends.
pub const R_MAX: f64 = 1e3;
pub const R_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    pub per_region: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { per_region: 2000, r_min: R_MIN, r_max: R_MAX }
    }
}

/// Which part of a component a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionLabel {
    LoEnd,
    Core,
    HiEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub h: f64,
    pub xi: Vec<f64>,
    pub x: Vec<f64>,
    /// `dx / dxi`.
    pub dx: Vec<f64>,
    /// `d^2 x / dxi^2`.
    pub ddx: Vec<f64>,
    /// Composite trapezoid weights for `integral dx`.
    pub q: Vec<f64>,
    pub labels: Vec<RegionLabel>,
}

impl RadialGrid {
    /// `n + 1` nodes uniform in `xi` on `[xi0, xi1]`.
    pub fn from_mesh(map: MeshMap, xi0: f64, xi1: f64, n: usize) -> Result<RadialGrid> {
        if n < 4 || !(xi1 > xi0) || !xi0.is_finite() || !xi1.is_finite() {
            return Err(ConifoldError::InvalidInput(format!("bad grid request [{xi0}, {xi1}] with {n} cells")));
        }
        let h = (xi1 - xi0) / n as f64;
        let xi: Vec<f64> = (0..=n).map(|i| if i == n { xi1 } else { xi0 + h * i as f64 }).collect();
        let jets: Vec<_> = xi.iter().map(|&s| map.eval(s)).collect();
        let x: Vec<f64> = jets.iter().map(|j| j.0).collect();
        let dx: Vec<f64> = jets.iter().map(|j| j.1).collect();
        let ddx: Vec<f64> = jets.iter().map(|j| j.2).collect();
        if dx.iter().any(|d| !(*d > 0.0)) {
            return Err(ConifoldError::InvalidInput("mesh map must be increasing".into()));
        }
        let mut q: Vec<f64> = dx.iter().map(|d| h * d).collect();
        q[0] *= 0.5;
        q[n] *= 0.5;
        let labels = vec![RegionLabel::Core; n + 1];
        Ok(RadialGrid { h, xi, x, dx, ddx, q, labels })
    }

    /// Grid covering the truncated component with `per_region * n_regions` cells.
    pub fn for_component(comp: &Component, opts: &GridOptions) -> Result<RadialGrid> {
        let map = comp.mesh();
        let (a, b) = comp.truncated_domain(opts.r_min, opts.r_max);
        let n = opts.per_region * comp.n_regions();
        let mut g = RadialGrid::from_mesh(map, map.inverse(a), map.inverse(b), n)?;
        // Pin endpoints exactly to the terminals.
        let last = g.x.len() - 1;
        g.x[0] = a;
        g.x[last] = b;
        g.label_regions(comp);
        Ok(g)
    }

    fn label_regions(&mut self, comp: &Component) {
        for (i, &x) in self.x.iter().enumerate() {
            let mut label = RegionLabel::Core;
            for (side, l) in [(Side::Lo, RegionLabel::LoEnd), (Side::Hi, RegionLabel::HiEnd)] {
                if let (Some(e), Some(r)) = (comp.end(side), comp.end_r(side, x)) {
                    let inside = match e.kind {
                        EndKind::CS => r <= e.boundary,
                        EndKind::AC => r >= e.boundary,
                    };
                    if inside && comp.glue().is_none() {
                        label = l;
                    }
                }
            }
            self.labels[i] = label;
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Contiguous index ranges sharing a label.
    pub fn regions(&self) -> Vec<(RegionLabel, std::ops::Range<usize>)> {
        let mut out: Vec<(RegionLabel, std::ops::Range<usize>)> = Vec::new();
        for (i, &l) in self.labels.iter().enumerate() {
            match out.last_mut() {
                Some((lab, r)) if *lab == l => r.end = i + 1,
                _ => out.push((l, i..i + 1)),
            }
        }
        out
    }

    /// The same `xi` nodes pushed forward by `x -> t x`.
    pub fn rescaled(&self, t: f64) -> RadialGrid {
        let s = |v: &Vec<f64>| v.iter().map(|a| a * t).collect::<Vec<_>>();
        RadialGrid {
            h: self.h,
            xi: self.xi.clone(),
            x: s(&self.x),
            dx: s(&self.dx),
            ddx: s(&self.ddx),
            q: s(&self.q),
            labels: self.labels.clone(),
        }
    }

    /// First and second x-derivatives of nodal values, second order accurate,
    /// one-sided at the two ends.
    pub fn derivatives(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let h = self.h;
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for i in 0..n {
            let (us, uss) = if i == 0 {
                ((-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h), (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (h * h))
            } else if i == n - 1 {
                (
                    (3.0 * u[i] - 4.0 * u[i - 1] + u[i - 2]) / (2.0 * h),
                    (2.0 * u[i] - 5.0 * u[i - 1] + 4.0 * u[i - 2] - u[i - 3]) / (h * h),
                )
            } else {
                ((u[i + 1] - u[i - 1]) / (2.0 * h), (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h))
            };
            let xp = self.dx[i];
            d1[i] = us / xp;
            d2[i] = (uss - self.ddx[i] / xp * us) / (xp * xp);
        }
        (d1, d2)
    }
}
