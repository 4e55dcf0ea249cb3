//! Test families of bump functions adapted to the radius function.
//!
//! Bumps are placed in the coordinate `s(x) = int dx / rho`, which equals
//! `+-log r` on ends, so a bump of fixed width in `s` has support proportional
//! to the local scale everywhere.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::grid::RadialGrid;
use super::norms::{Mode, ModeFunction};
use crate::conifold_model::ConifoldModel;
use crate::error::{ConifoldError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyOptions {
    /// Number of centres spread uniformly in `s`.
    pub centres: usize,
    /// Half-width of each bump in `s`.
    pub half_width: f64,
    /// Link eigenvalues carried by the members (one member per centre and eigenvalue).
    pub eigenvalues: Vec<f64>,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions { centres: 16, half_width: 0.6, eigenvalues: vec![0.0] }
    }
}

/// `exp(1 - 1/(1 - s^2))` on `|s| < 1`.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Cumulative `int dx / rho` at the grid nodes.
pub fn scale_coordinate(model: &ConifoldModel, component: usize, grid: &RadialGrid) -> Vec<f64> {
    let comp = &model.components()[component];
    let inv: Vec<f64> = grid.x.iter().map(|&x| 1.0 / comp.rho(x)).collect();
    let mut s = vec![0.0; grid.len()];
    for i in 1..grid.len() {
        s[i] = s[i - 1] + 0.5 * (inv[i] + inv[i - 1]) * (grid.x[i] - grid.x[i - 1]);
    }
    s
}

fn bump_member(s: &[f64], centre: f64, half_width: f64, e: f64) -> Mode {
    Mode { e, values: s.iter().map(|&v| bump((v - centre) / half_width)).collect() }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v < x).clamp(1, xs.len() - 1);
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

/// Bumps at equally spaced positions in `s`, plus the core and neck midpoints of a connect sum.
pub fn bump_family(model: &ConifoldModel, component: usize, grid: &RadialGrid, opts: &FamilyOptions) -> Result<Vec<ModeFunction>> {
    if opts.centres == 0 || opts.eigenvalues.is_empty() || !(opts.half_width > 0.0) {
        return Err(ConifoldError::InvalidInput("empty test family".into()));
    }
    let s = scale_coordinate(model, component, grid);
    let margin = opts.half_width * 1.05;
    let (s0, s1) = (s[0] + margin, s[s.len() - 1] - margin);
    if !(s1 > s0) {
        return Err(ConifoldError::InvalidInput("domain too short for the requested bump width".into()));
    }
    let mut centres: Vec<f64> = (0..opts.centres)
        .map(|i| if opts.centres == 1 { 0.5 * (s0 + s1) } else { s0 + (s1 - s0) * i as f64 / (opts.centres - 1) as f64 })
        .collect();
    if let Some(g) = model.components()[component].glue() {
        let (band_lo, eps) = g.neck();
        let mid_neck = (band_lo * eps).sqrt();
        for x in [0.0, mid_neck] {
            if x > grid.x[0] && x < grid.x[grid.len() - 1] {
                let c = interp(&grid.x, &s, x);
                if c > s0 && c < s1 {
                    centres.push(c);
                }
            }
        }
    }
    let mut out = Vec::new();
    for &e in &opts.eigenvalues {
        for &c in &centres {
            out.push(ModeFunction::single(component, grid.clone(), vec![bump_member(&s, c, opts.half_width, e)]));
        }
    }
    Ok(out)
}

/// Seeded random bumps with random centre, width, amplitude and one or two modes.
pub fn random_bumps(
    model: &ConifoldModel,
    component: usize,
    grid: &RadialGrid,
    eigenvalues: &[f64],
    count: usize,
    seed: u64,
) -> Result<Vec<ModeFunction>> {
    if eigenvalues.is_empty() {
        return Err(ConifoldError::InvalidInput("no eigenvalues for random bumps".into()));
    }
    let s = scale_coordinate(model, component, grid);
    let (lo, hi) = (s[0], s[s.len() - 1]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let hw = rng.random_range(0.3..1.5f64).min(0.45 * (hi - lo));
        let c = rng.random_range(lo + hw..hi - hw);
        let n_modes = if eigenvalues.len() > 1 && rng.random_bool(0.5) { 2 } else { 1 };
        let mut modes: Vec<Mode> = Vec::new();
        while modes.len() < n_modes {
            let e = eigenvalues[rng.random_range(0..eigenvalues.len())];
            if modes.iter().any(|m| m.e == e) {
                continue;
            }
            let amp = rng.random_range(0.2..2.0f64) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let mut m = bump_member(&s, c, hw, e);
            m.values.iter_mut().for_each(|v| *v *= amp);
            modes.push(m);
        }
        out.push(ModeFunction::single(component, grid.clone(), modes));
    }
    Ok(out)
}

/// Node position of the largest coefficient of the first mode.
pub fn member_centre_x(u: &ModeFunction) -> Option<f64> {
    let p = u.pieces.first()?;
    let m = p.modes.first()?;
    let (i, _) = m.values.iter().enumerate().fold((0, 0.0f64), |a, (i, v)| if v.abs() > a.1 { (i, v.abs()) } else { a });
    Some(p.grid.x[i])
}

