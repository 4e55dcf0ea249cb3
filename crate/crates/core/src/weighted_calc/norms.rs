//! Weighted Sobolev and C^k norms of mode-decomposed functions.

use serde::{Deserialize, Serialize};

use super::angular::{AngularSamples, ANGULAR_SAMPLES};
use super::grid::RadialGrid;
use crate::conifold_model::{Component, ConifoldModel, EndKind, Side};
use crate::error::{ConifoldError, Result};
use crate::numerics::fit_line;

/// One radial coefficient `u_n` of `u = sum_n u_n(x) sigma_n` with `||sigma_n||_{L^2} = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub e: f64,
    pub values: Vec<f64>,
}

/// The restriction of a function to one component.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub component: usize,
    pub grid: RadialGrid,
    pub modes: Vec<Mode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunction {
    pub pieces: Vec<Piece>,
}

impl ModeFunction {
    pub fn single(component: usize, grid: RadialGrid, modes: Vec<Mode>) -> ModeFunction {
        ModeFunction { pieces: vec![Piece { component, grid, modes }] }
    }

    /// Samples `u_n = phi_n(x)` for each `(e_n, phi_n)`.
    pub fn from_fns(component: usize, grid: RadialGrid, fns: &[(f64, &dyn Fn(f64) -> f64)]) -> ModeFunction {
        let modes = fns.iter().map(|(e, f)| Mode { e: *e, values: grid.x.iter().map(|&x| f(x)).collect() }).collect();
        ModeFunction::single(component, grid, modes)
    }

    /// Angle-independent function `phi(x)`; the mode coefficient is `phi * sqrt(vol)`.
    pub fn radial(model: &ConifoldModel, component: usize, grid: RadialGrid, phi: &dyn Fn(f64) -> f64) -> Result<Self> {
        let comp = component_of(model, component)?;
        let vol = comp.link().volume().ok_or_else(|| {
            ConifoldError::Unsupported(format!("link {} has no known volume", comp.link().label()))
        })?;
        let s = vol.sqrt();
        Ok(ModeFunction::from_fns(component, grid, &[(0.0, &|x| s * phi(x))]))
    }

    pub fn scaled(&self, c: f64) -> ModeFunction {
        let mut out = self.clone();
        for p in &mut out.pieces {
            for m in &mut p.modes {
                m.values.iter_mut().for_each(|v| *v *= c);
            }
        }
        out
    }

    /// Pushforward under `x -> t x`, living on the rescaled model.
    pub fn rescaled(&self, t: f64) -> ModeFunction {
        ModeFunction {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { component: p.component, grid: p.grid.rescaled(t), modes: p.modes.clone() })
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.modes.iter().all(|m| m.values.iter().all(|v| *v == 0.0)))
    }

    fn validate(&self, model: &ConifoldModel) -> Result<()> {
        for p in &self.pieces {
            component_of(model, p.component)?;
            if p.grid.len() < 4 {
                return Err(ConifoldError::InvalidInput("grid too small".into()));
            }
            for (i, m) in p.modes.iter().enumerate() {
                if m.values.len() != p.grid.len() {
                    return Err(ConifoldError::InvalidInput(format!(
                        "mode {i} has {} values on a grid of {} nodes",
                        m.values.len(),
                        p.grid.len()
                    )));
                }
                if m.values.iter().any(|v| !v.is_finite()) || !m.e.is_finite() {
                    return Err(ConifoldError::NonFinite(format!("mode {i} (e = {})", m.e)));
                }
                if p.modes[..i].iter().any(|o| o.e == m.e) {
                    return Err(ConifoldError::InvalidInput(format!("eigenvalue {} appears twice", m.e)));
                }
            }
        }
        Ok(())
    }
}

fn component_of(model: &ConifoldModel, i: usize) -> Result<&Component> {
    model
        .components()
        .get(i)
        .ok_or_else(|| ConifoldError::InvalidInput(format!("model has no component {i}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaChoice {
    /// Use the model's weight function (per-end betas, connect-sum bookkeeping).
    Model,
    /// `w = rho^(-beta)` with a constant exponent.
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub p: f64,
    pub k: usize,
    pub beta: BetaChoice,
    /// Reference exponent `beta'` used when comparing with a rescaled model.
    #[serde(default)]
    pub beta_ref: Option<f64>,
    /// Keep only the `j = k` term (seminorm of the top derivative).
    #[serde(default)]
    pub only_top: bool,
}

impl WeightSpec {
    pub fn new(p: f64, k: usize, beta: BetaChoice) -> WeightSpec {
        WeightSpec { p, k, beta, beta_ref: None, only_top: false }
    }

    pub fn constant(p: f64, k: usize, beta: f64) -> WeightSpec {
        WeightSpec::new(p, k, BetaChoice::Constant(beta))
    }

    /// `||d u||_{L^p_{beta - 1}}`, i.e. the `j = 1` term of `W^p_{1,beta}`.
    pub fn gradient(p: f64, beta: BetaChoice) -> WeightSpec {
        WeightSpec { p, k: 1, beta, beta_ref: None, only_top: true }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(ConifoldError::InvalidInput(format!("p = {} must be finite and >= 1", self.p)));
        }
        if self.k > 2 {
            return Err(ConifoldError::Unsupported(format!("derivative depth k = {} (at most 2)", self.k)));
        }
        Ok(())
    }

    fn j_range(&self) -> std::ops::RangeInclusive<usize> {
        if self.only_top {
            self.k..=self.k
        } else {
            0..=self.k
        }
    }

    fn weight(&self, comp: &Component, x: f64) -> f64 {
        match self.beta {
            BetaChoice::Model => comp.weight(x, 0.0),
            BetaChoice::Constant(b) => comp.rho(x).powf(-b),
        }
    }
}

/// Pointwise jet of a function on the warped product in the frame
/// `(d_r, E, E_perp...)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointJet {
    pub val: f64,
    pub gr: f64,
    pub ge: f64,
    pub hrr: f64,
    pub hre: f64,
    pub hee: f64,
    pub hperp: f64,
}

impl PointJet {
    fn product(&self, o: &PointJet) -> PointJet {
        PointJet {
            val: self.val * o.val,
            gr: self.val * o.gr + o.val * self.gr,
            ge: self.val * o.ge + o.val * self.ge,
            hrr: self.val * o.hrr + 2.0 * self.gr * o.gr + o.val * self.hrr,
            hre: self.val * o.hre + self.gr * o.ge + self.ge * o.gr + o.val * self.hre,
            hee: self.val * o.hee + 2.0 * self.ge * o.ge + o.val * self.hee,
            hperp: self.val * o.hperp + o.val * self.hperp,
        }
    }

    /// `|nabla^j u|` for `j = 0, 1, 2`; `d` is the link dimension.
    fn magnitude(&self, j: usize, d: usize) -> f64 {
        match j {
            0 => self.val.abs(),
            1 => self.gr.hypot(self.ge),
            _ => (self.hrr * self.hrr
                + 2.0 * self.hre * self.hre
                + self.hee * self.hee
                + (d as f64 - 1.0) * self.hperp * self.hperp)
                .sqrt(),
        }
    }
}

/// Per-piece data for pointwise evaluation.
struct PieceEval<'a> {
    comp: &'a Component,
    piece: &'a Piece,
    d1: Vec<Vec<f64>>,
    d2: Vec<Vec<f64>>,
    ang: AngularSamples,
}

impl<'a> PieceEval<'a> {
    fn new(model: &'a ConifoldModel, piece: &'a Piece) -> Result<PieceEval<'a>> {
        let comp = component_of(model, piece.component)?;
        let es: Vec<f64> = piece.modes.iter().map(|m| m.e).collect();
        let ang = AngularSamples::new(comp.link(), &es, ANGULAR_SAMPLES)?;
        let (d1, d2) = piece.modes.iter().map(|m| piece.grid.derivatives(&m.values)).unzip();
        Ok(PieceEval { comp, piece, d1, d2, ang })
    }

    fn jets_at(&self, i: usize, out: &mut Vec<PointJet>) {
        let x = self.piece.grid.x[i];
        let (f, fp, _) = self.comp.warp(x);
        let w = fp / f;
        out.clear();
        out.resize(self.ang.len(), PointJet::default());
        for (n, m) in self.piece.modes.iter().enumerate() {
            let (u, u1, u2) = (m.values[i], self.d1[n][i], self.d2[n][i]);
            for (s, lj) in self.ang.jets[n].iter().enumerate() {
                let o = &mut out[s];
                o.val += u * lj.val;
                o.gr += u1 * lj.val;
                o.ge += u * lj.g / f;
                o.hrr += u2 * lj.val;
                o.hre += (u1 - w * u) * lj.g / f;
                o.hee += u * lj.h_ee / (f * f) + w * u1 * lj.val;
                o.hperp += u * lj.h_perp / (f * f) + w * u1 * lj.val;
            }
        }
    }
}

/// Radial density of `sum_j int_Sigma (w rho^j |nabla^j u|)^p rho^-m f^(m-1)` from pointwise jets.
fn density_from_jets(comp: &Component, m: usize, x: f64, jets: &[PointJet], wq: &[f64], spec: &WeightSpec, w: f64) -> f64 {
    let rho = comp.rho(x);
    let f = comp.warp(x).0;
    let d = m - 1;
    let mut acc = 0.0;
    for j in spec.j_range() {
        let c = w * rho.powi(j as i32);
        let s: f64 = jets.iter().zip(wq).map(|(pj, q)| q * (c * pj.magnitude(j, d)).powf(spec.p)).sum();
        acc += s;
    }
    acc * rho.powi(-(m as i32)) * f.powi(m as i32 - 1)
}

/// Exact angular integration at `p = 2`.
fn density_p2(comp: &Component, m: usize, piece: &Piece, d1: &[Vec<f64>], d2: &[Vec<f64>], i: usize, spec: &WeightSpec, w: f64) -> Result<f64> {
    let x = piece.grid.x[i];
    let rho = comp.rho(x);
    let (f, fp, _) = comp.warp(x);
    let d = (m - 1) as f64;
    let mut acc = 0.0;
    for j in spec.j_range() {
        let mut t = 0.0;
        for (n, md) in piece.modes.iter().enumerate() {
            let (u, u1, u2, e) = (md.values[i], d1[n][i], d2[n][i], md.e);
            t += match j {
                0 => u * u,
                1 => u1 * u1 + e * u * u / (f * f),
                _ => {
                    let kappa = if e == 0.0 {
                        0.0
                    } else {
                        comp.link().einstein_constant().ok_or_else(|| {
                            ConifoldError::Unsupported(format!(
                                "second derivatives of non-constant modes on {} need its Einstein constant",
                                comp.link().label()
                            ))
                        })?
                    };
                    let mixed = u1 - fp / f * u;
                    u2 * u2
                        + 2.0 * e * mixed * mixed / (f * f)
                        + ((e * e - kappa * e) * u * u - 2.0 * e * f * fp * u * u1 + d * f * f * fp * fp * u1 * u1)
                            / f.powi(4)
                }
            } * (w * rho.powi(j as i32)).powi(2);
        }
        acc += t;
    }
    Ok(acc * rho.powi(-(m as i32)) * f.powi(m as i32 - 1))
}

/// Radial densities (integrand per unit `dx`) of the `p`-th power of the norm.
fn piece_densities(
    model: &ConifoldModel,
    piece: &Piece,
    spec: &WeightSpec,
    extra: &dyn Fn(&Component, f64) -> f64,
    pointwise: bool,
) -> Result<Vec<f64>> {
    let comp = component_of(model, piece.component)?;
    let m = model.m();
    let g = &piece.grid;
    if !pointwise && spec.p == 2.0 {
        let (d1, d2): (Vec<_>, Vec<_>) = piece.modes.iter().map(|md| g.derivatives(&md.values)).unzip();
        return (0..g.len())
            .map(|i| {
                let x = g.x[i];
                density_p2(comp, m, piece, &d1, &d2, i, spec, spec.weight(comp, x) * extra(comp, x))
            })
            .collect();
    }
    let ev = PieceEval::new(model, piece)?;
    let mut jets = Vec::new();
    Ok((0..g.len())
        .map(|i| {
            let x = g.x[i];
            ev.jets_at(i, &mut jets);
            density_from_jets(comp, m, x, &jets, &ev.ang.weights, spec, spec.weight(comp, x) * extra(comp, x))
        })
        .collect())
}

/// Result of a norm evaluation on a truncated grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    /// Norm computed on the truncated domain.
    pub value: f64,
    /// `value^p` plus the extrapolated tail beyond the truncation radii, to the power `1/p`.
    pub with_tail: f64,
    /// Extrapolated contribution of the tails to `value^p` (may be infinite).
    pub tail: f64,
    /// Set when the tail is infinite or exceeds `1e-6` of the truncated integral.
    pub tail_flag: bool,
}

/// Nodes of an end lying within one decade of the truncation radius, with
/// their end radii.
fn end_window(comp: &Component, grid: &RadialGrid) -> Vec<(EndKind, Vec<(usize, f64)>)> {
    let mut out = Vec::new();
    for (side, e) in comp.ends() {
        let idx_edge = match side {
            Side::Lo => 0,
            Side::Hi => grid.len() - 1,
        };
        let Some(r_edge) = comp.end_r(side, grid.x[idx_edge]) else { continue };
        let mut w = Vec::new();
        for (i, &x) in grid.x.iter().enumerate() {
            let Some(r) = comp.end_r(side, x) else { continue };
            let inside = match e.kind {
                EndKind::AC => r >= r_edge / 10.0 && r >= e.boundary,
                EndKind::CS => r <= r_edge * 10.0 && r <= e.boundary,
            };
            if inside && r > 0.0 {
                w.push((i, r));
            }
        }
        if w.len() >= 3 {
            out.push((e.kind, w));
        }
    }
    out
}

/// Power-law slope of positive samples in log-log coordinates; `None` if too few.
fn loglog_slope(samples: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples.iter().filter(|(_, v)| *v > 0.0).map(|(r, v)| (r.ln(), v.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    Some(fit_line(&x, &y).0)
}

fn tail_of(comp: &Component, grid: &RadialGrid, dens: &[f64]) -> f64 {
    let mut tail = 0.0;
    for (kind, w) in end_window(comp, grid) {
        // Density per d(log r) is dens * r on an end.
        let samples: Vec<(f64, f64)> = w.iter().map(|&(i, r)| (r, dens[i] * r)).collect();
        let edge = match kind {
            EndKind::AC => samples.iter().cloned().fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a }),
            EndKind::CS => samples.iter().cloned().fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a }),
        };
        if edge.1 <= 0.0 {
            continue;
        }
        let Some(s) = loglog_slope(&samples) else { continue };
        let decay = match kind {
            EndKind::AC => -s,
            EndKind::CS => s,
        };
        tail += if decay > 1e-9 { edge.1 / decay } else { f64::INFINITY };
    }
    tail
}

fn norm_report(
    model: &ConifoldModel,
    u: &ModeFunction,
    spec: &WeightSpec,
    extra: &dyn Fn(&Component, f64) -> f64,
    pointwise: bool,
) -> Result<NormReport> {
    spec.validate()?;
    u.validate(model)?;
    let (mut integral, mut tail) = (0.0, 0.0);
    for piece in &u.pieces {
        let dens = piece_densities(model, piece, spec, extra, pointwise)?;
        if dens.iter().any(|d| !d.is_finite()) {
            return Err(ConifoldError::NonFinite("norm integrand".into()));
        }
        integral += dens.iter().zip(&piece.grid.q).map(|(d, q)| d * q).sum::<f64>();
        tail += tail_of(component_of(model, piece.component)?, &piece.grid, &dens);
    }
    let inv = 1.0 / spec.p;
    Ok(NormReport {
        value: integral.powf(inv),
        with_tail: (integral + tail).powf(inv),
        tail,
        tail_flag: !tail.is_finite() || tail > 1e-6 * integral,
    })
}

/// `(sum_j int |w rho^j nabla^j u|^p rho^-m vol)^(1/p)` with the tail report.
pub fn weighted_sobolev_report(u: &ModeFunction, model: &ConifoldModel, spec: &WeightSpec) -> Result<NormReport> {
    norm_report(model, u, spec, &|_, _| 1.0, false)
}

/// Weighted Sobolev norm on the truncated domain.
pub fn weighted_sobolev_norm(u: &ModeFunction, model: &ConifoldModel, spec: &WeightSpec) -> Result<f64> {
    Ok(weighted_sobolev_report(u, model, spec)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CkReport {
    pub value: f64,
    /// Fitted log-log slope of the nodal supremum near each truncated end.
    pub end_slopes: Vec<f64>,
    /// The supremum keeps growing toward some truncation radius.
    pub diverges: bool,
}

/// Growth slopes above this magnitude count as divergence of the supremum.
pub const CK_SLOPE_TOL: f64 = 1e-2;

/// `sup sum_j |w rho^j nabla^j u|` over nodes and link samples.
pub fn weighted_ck_norm(u: &ModeFunction, model: &ConifoldModel, k: usize, beta: BetaChoice) -> Result<CkReport> {
    let spec = WeightSpec::new(1.0, k, beta);
    spec.validate()?;
    u.validate(model)?;
    let d = model.m() - 1;
    let (mut value, mut slopes, mut diverges) = (0.0f64, Vec::new(), false);
    for piece in &u.pieces {
        let comp = component_of(model, piece.component)?;
        let ev = PieceEval::new(model, piece)?;
        let mut jets = Vec::new();
        let sups: Vec<f64> = (0..piece.grid.len())
            .map(|i| {
                let x = piece.grid.x[i];
                let (w, rho) = (spec.weight(comp, x), comp.rho(x));
                ev.jets_at(i, &mut jets);
                jets.iter()
                    .map(|pj| (0..=k).map(|j| w * rho.powi(j as i32) * pj.magnitude(j, d)).sum::<f64>())
                    .fold(0.0, f64::max)
            })
            .collect();
        if sups.iter().any(|s| !s.is_finite()) {
            return Err(ConifoldError::NonFinite("C^k integrand".into()));
        }
        value = sups.iter().cloned().fold(value, f64::max);
        for (kind, w) in end_window(comp, &piece.grid) {
            let samples: Vec<(f64, f64)> = w.iter().map(|&(i, r)| (r, sups[i])).collect();
            if let Some(s) = loglog_slope(&samples) {
                slopes.push(s);
                diverges |= match kind {
                    EndKind::AC => s > CK_SLOPE_TOL,
                    EndKind::CS => s < -CK_SLOPE_TOL,
                };
            }
        }
    }
    Ok(CkReport { value, end_slopes: slopes, diverges })
}

fn beta_ref_of(model: &ConifoldModel, spec: &WeightSpec) -> Result<f64> {
    if let Some(b) = spec.beta_ref {
        return Ok(b);
    }
    match spec.beta {
        BetaChoice::Constant(b) => Ok(b),
        BetaChoice::Model => {
            let betas: Vec<f64> = model.ends().iter().map(|e| e.spec.beta).collect();
            match betas.first() {
                Some(&b) if betas.iter().all(|&x| x == b) => Ok(b),
                Some(_) => Err(ConifoldError::InvalidInput("non-constant weights need an explicit beta_ref".into())),
                None => Ok(0.0),
            }
        }
    }
}

/// `|t^beta' ||u_t||_t - ||u|| | / ||u||` where the rescaled norm uses the weight `t^(beta - beta') w_t`.
pub fn rescaling_invariance_check(u: &ModeFunction, model: &ConifoldModel, spec: &WeightSpec, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(ConifoldError::InvalidInput(format!("rescaling parameter t = {t} must be positive")));
    }
    let base = weighted_sobolev_norm(u, model, spec)?;
    if t == 1.0 {
        return Ok(0.0);
    }
    let bref = beta_ref_of(model, spec)?;
    let scaled_model = model.rescale(t)?;
    let ut = u.rescaled(t);
    let beta_at = |c: &Component, x: f64| match spec.beta {
        BetaChoice::Model => c.beta(x),
        BetaChoice::Constant(b) => b,
    };
    let rescaled = norm_report(&scaled_model, &ut, spec, &|c, x| t.powf(beta_at(c, x) - bref), false)?.value;
    if base == 0.0 {
        return Ok(if rescaled == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((t.powf(bref) * rescaled - base).abs() / base)
}

/// Pointwise products need matching pieces.
fn check_pairable(u: &ModeFunction, v: &ModeFunction) -> Result<()> {
    let ok = u.pieces.len() == v.pieces.len()
        && u.pieces.iter().zip(&v.pieces).all(|(a, b)| a.component == b.component && a.grid.x == b.grid.x);
    if ok {
        Ok(())
    } else {
        Err(ConifoldError::InvalidInput("functions must live on the same grids".into()))
    }
}

/// `int |u v| rho^(-b1-b2) rho^-m vol` style integrals over product jets.
fn product_integral(u: &ModeFunction, v: &ModeFunction, model: &ConifoldModel, spec: &WeightSpec) -> Result<f64> {
    spec.validate()?;
    u.validate(model)?;
    v.validate(model)?;
    check_pairable(u, v)?;
    let mut total = 0.0;
    for (pu, pv) in u.pieces.iter().zip(&v.pieces) {
        let comp = component_of(model, pu.component)?;
        let (eu, ev) = (PieceEval::new(model, pu)?, PieceEval::new(model, pv)?);
        let (mut ju, mut jv, mut jp) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..pu.grid.len() {
            let x = pu.grid.x[i];
            eu.jets_at(i, &mut ju);
            ev.jets_at(i, &mut jv);
            // Broadcast a constant-in-angle factor against a sampled one.
            let n = ju.len().max(jv.len());
            let wq = if ju.len() >= jv.len() { &eu.ang.weights } else { &ev.ang.weights };
            jp.clear();
            for s in 0..n {
                let a = ju[if ju.len() == 1 { 0 } else { s }];
                let b = jv[if jv.len() == 1 { 0 } else { s }];
                jp.push(a.product(&b));
            }
            let w = spec.weight(comp, x);
            total += pu.grid.q[i] * density_from_jets(comp, model.m(), x, &jp, wq, spec, w);
        }
    }
    Ok(total)
}

fn pointwise_norm(u: &ModeFunction, model: &ConifoldModel, spec: &WeightSpec) -> Result<f64> {
    Ok(norm_report(model, u, spec, &|_, _| 1.0, true)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub lhs: f64,
    pub rhs: f64,
    pub violated: bool,
}

/// Relative slack allowed before an inequality counts as violated.
pub const INEQUALITY_SLACK: f64 = 1e-10;

/// `||u v||_{L^1_{b1+b2}}` against `||u||_{L^p_{b1}} ||v||_{L^p'_{b2}}`.
pub fn holder_check(u: &ModeFunction, v: &ModeFunction, model: &ConifoldModel, p: f64, b1: f64, b2: f64) -> Result<HolderReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(ConifoldError::InvalidInput(format!("Hölder exponent p = {p} must exceed 1")));
    }
    let pp = p / (p - 1.0);
    let lhs = product_integral(u, v, model, &WeightSpec::constant(1.0, 0, b1 + b2))?;
    let rhs = pointwise_norm(u, model, &WeightSpec::constant(p, 0, b1))?
        * pointwise_norm(v, model, &WeightSpec::constant(pp, 0, b2))?;
    Ok(HolderReport { lhs, rhs, violated: lhs > rhs * (1.0 + INEQUALITY_SLACK) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub lhs: f64,
    pub rhs_ratio: f64,
}

/// `||u v||_{W^p_{k,b1+b2}} / (||u||_{W^p_{k,b1}} ||v||_{W^p_{k,b2}})`; requires `k p > m`.
pub fn banach_algebra_check(
    u: &ModeFunction,
    v: &ModeFunction,
    model: &ConifoldModel,
    p: f64,
    k: usize,
    b1: f64,
    b2: f64,
) -> Result<AlgebraReport> {
    if k as f64 * p <= model.m() as f64 {
        return Err(ConifoldError::InvalidInput(format!(
            "multiplication needs k p > m; got k = {k}, p = {p}, m = {}",
            model.m()
        )));
    }
    let lhs = product_integral(u, v, model, &WeightSpec::constant(p, k, b1 + b2))?.powf(1.0 / p);
    let nu = pointwise_norm(u, model, &WeightSpec::constant(p, k, b1))?;
    let nv = pointwise_norm(v, model, &WeightSpec::constant(p, k, b2))?;
    let rhs_ratio = if lhs == 0.0 { 0.0 } else { lhs / (nu * nv) };
    Ok(AlgebraReport { lhs, rhs_ratio })
}

/// Critical Sobolev exponent `m p / (m - l p)`.
pub fn sobolev_exponent(m: usize, p: f64, l: usize) -> Result<f64> {
    let (m, l) = (m as f64, l as f64);
    if l * p >= m {
        return Err(ConifoldError::InvalidInput(format!("embedding exponent needs l p < m (l = {l}, p = {p}, m = {m})")));
    }
    Ok(m * p / (m - l * p))
}

/// Ratio of each family member and the family maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub max_ratio: f64,
    pub argmax: usize,
    pub ratios: Vec<f64>,
}

fn ratio_over_family(
    family: &[ModeFunction],
    f: &(dyn Fn(&ModeFunction) -> Result<f64> + Sync),
) -> Result<RatioReport> {
    use rayon::prelude::*;
    if family.is_empty() {
        return Err(ConifoldError::InvalidInput("empty test family".into()));
    }
    let ratios: Vec<f64> = family.par_iter().map(f).collect::<Result<_>>()?;
    let (argmax, max_ratio) =
        ratios.iter().cloned().enumerate().fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    Ok(RatioReport { max_ratio, argmax, ratios })
}

/// `max_u ||u||_{L^p*_beta} / ||u||_{W^p_{1,beta}}` over the test family (`k = 0`, `l = 1`).
pub fn embedding_constant_estimate(
    model: &ConifoldModel,
    p: f64,
    beta: BetaChoice,
    family: &[ModeFunction],
) -> Result<RatioReport> {
    let ps = sobolev_exponent(model.m(), p, 1)?;
    ratio_over_family(family, &|u| {
        if u.is_zero() {
            return Err(ConifoldError::InvalidInput("zero test function".into()));
        }
        let num = pointwise_norm(u, model, &WeightSpec::new(ps, 0, beta))?;
        let den = pointwise_norm(u, model, &WeightSpec::new(p, 1, beta))?;
        Ok(num / den)
    })
}

/// `max_u ||u||_{L^p*_beta} / ||du||_{L^p_{beta-1}}` over the test family.
pub fn gns_constant_estimate(model: &ConifoldModel, p: f64, beta: BetaChoice, family: &[ModeFunction]) -> Result<RatioReport> {
    let ps = sobolev_exponent(model.m(), p, 1)?;
    ratio_over_family(family, &|u| {
        if u.is_zero() {
            return Err(ConifoldError::InvalidInput("zero test function".into()));
        }
        let num = pointwise_norm(u, model, &WeightSpec::new(ps, 0, beta))?;
        let den = pointwise_norm(u, model, &WeightSpec::gradient(p, beta))?;
        Ok(num / den)
    })
}

/// Pointwise-quadrature norm, used where products or general `p` are compared.
pub fn pointwise_sobolev_norm(u: &ModeFunction, model: &ConifoldModel, spec: &WeightSpec) -> Result<f64> {
    pointwise_norm(u, model, spec)
}
