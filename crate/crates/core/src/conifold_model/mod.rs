//! Radial models of conifolds: warped products `dx^2 + f(x)^2 g'` over a link,
//! with conical ends, radius functions, weights and the t-parametrised
//! connect sum.
//!
//! Each component is one radial interval. Its two terminals are either ends
//! (CS towards a finite tip, AC towards infinity), a cap, or a mirror plane
//! used to represent reflection-symmetric models on half their domain.
//!
//! End radial coordinates in component coordinates `x`:
//! lower AC end `r = -x`, lower CS end `r = x - x_lo`,
//! upper CS end `r = x_hi - x`, upper AC end `r = x`.

pub mod config;
pub mod glue;
pub mod presets;
pub mod profile;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ConifoldError, Result};
use crate::link_spectra::Link;
use crate::numerics::smoothstep_inf;
pub use crate::weight_calculus::EndKind;

pub use glue::{
    neck_convergence_check, parametric_connect_sum, GlueData, GluedFamily, InterpolationRule, NeckRow,
};
pub use profile::{Jet, Profile, ProfileSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lo,
    Hi,
}

/// One end of a component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndSpec {
    pub kind: EndKind,
    /// Convergence rate: positive on CS ends, negative on AC ends.
    pub nu: f64,
    pub beta: f64,
    /// `epsilon` for CS ends (chart `r <= epsilon`), `R` for AC ends (chart `r >= R`).
    pub boundary: f64,
    pub marked: bool,
}

impl EndSpec {
    pub fn cs(nu: f64, beta: f64, eps: f64) -> Self {
        EndSpec { kind: EndKind::CS, nu, beta, boundary: eps, marked: false }
    }

    pub fn ac(nu: f64, beta: f64, r: f64) -> Self {
        EndSpec { kind: EndKind::AC, nu, beta, boundary: r, marked: false }
    }

    pub fn marked(mut self) -> Self {
        self.marked = true;
        self
    }

    fn validate(&self) -> Result<()> {
        let ok_sign = match self.kind {
            EndKind::CS => self.nu > 0.0,
            EndKind::AC => self.nu < 0.0,
        };
        if !ok_sign {
            return Err(ConifoldError::InvalidInput(format!(
                "rate nu = {} has the wrong sign for a {:?} end",
                self.nu, self.kind
            )));
        }
        if !(self.boundary > 0.0 && self.boundary.is_finite()) {
            return Err(ConifoldError::InvalidInput(format!("end boundary {} must be positive", self.boundary)));
        }
        if !self.beta.is_finite() {
            return Err(ConifoldError::NonFinite("end weight".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Terminal {
    End(EndSpec),
    /// Smooth centre: mode 0 has zero slope, higher modes vanish.
    Cap,
    /// Reflection plane; solvers treat even and odd sectors separately.
    Mirror,
}

impl Terminal {
    pub fn end(&self) -> Option<&EndSpec> {
        match self {
            Terminal::End(e) => Some(e),
            _ => None,
        }
    }

    fn scaled(&self, t: f64) -> Terminal {
        match *self {
            Terminal::End(mut e) => {
                e.boundary *= t;
                Terminal::End(e)
            }
            other => other,
        }
    }
}

/// Analytic map `xi -> x` along which radial grids are uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeshMap {
    /// `x = x0 + s e^xi`.
    Exp { x0: f64, s: f64 },
    /// `x = x0 + c sinh(xi)`.
    Sinh { x0: f64, c: f64 },
    /// `x = x0 + (2 len / pi) atan(e^xi)`, graded towards both ends of `(x0, x0 + len)`.
    LogTan { x0: f64, len: f64 },
    /// `x = x0 + c xi`.
    Linear { x0: f64, c: f64 },
}

impl MeshMap {
    /// `(X, X', X'')` at `xi`.
    pub fn eval(&self, xi: f64) -> Jet {
        match *self {
            MeshMap::Exp { x0, s } => {
                let e = s * xi.exp();
                (x0 + e, e, e)
            }
            MeshMap::Sinh { x0, c } => (x0 + c * xi.sinh(), c * xi.cosh(), c * xi.sinh()),
            MeshMap::LogTan { x0, len } => {
                let k = len / std::f64::consts::PI;
                let sech = 1.0 / xi.cosh();
                (x0 + 2.0 * k * xi.exp().atan(), k * sech, -k * sech * xi.tanh())
            }
            MeshMap::Linear { x0, c } => (x0 + c * xi, c, 0.0),
        }
    }

    pub fn inverse(&self, x: f64) -> f64 {
        match *self {
            MeshMap::Exp { x0, s } => ((x - x0) / s).ln(),
            MeshMap::Sinh { x0, c } => ((x - x0) / c).asinh(),
            MeshMap::LogTan { x0, len } => (std::f64::consts::PI * (x - x0) / (2.0 * len)).tan().ln(),
            MeshMap::Linear { x0, c } => (x - x0) / c,
        }
    }

    /// The map composed with `x -> t x`.
    pub fn scaled(&self, t: f64) -> MeshMap {
        match *self {
            MeshMap::Exp { x0, s } => MeshMap::Exp { x0: x0 * t, s: s * t },
            MeshMap::Sinh { x0, c } => MeshMap::Sinh { x0: x0 * t, c: c * t },
            MeshMap::LogTan { x0, len } => MeshMap::LogTan { x0: x0 * t, len: len * t },
            MeshMap::Linear { x0, c } => MeshMap::Linear { x0: x0 * t, c: c * t },
        }
    }
}

/// Radius function on the core, between the end charts.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Core {
    /// C^1 cubic matching value and slope at both chart boundaries.
    Hermite { x0: f64, x1: f64, v0: f64, s0: f64, v1: f64, s1: f64 },
    /// `A + B (x - xc)^2`, flat at a cap or mirror.
    Quadratic { xc: f64, a: f64, b: f64 },
    /// Compact component without ends.
    Unit,
}

impl Core {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            Core::Hermite { x0, x1, v0, s0, v1, s1 } => {
                let h = x1 - x0;
                if h <= 0.0 {
                    return v0;
                }
                let u = (x - x0) / h;
                let (u2, u3) = (u * u, u * u * u);
                (2.0 * u3 - 3.0 * u2 + 1.0) * v0
                    + (u3 - 2.0 * u2 + u) * h * s0
                    + (-2.0 * u3 + 3.0 * u2) * v1
                    + (u3 - u2) * h * s1
            }
            Core::Quadratic { xc, a, b } => a + b * (x - xc) * (x - xc),
            Core::Unit => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
enum Geometry {
    Standard(Core),
    Glued(Arc<GlueData>),
}

/// One connected radial piece of a conifold model.
#[derive(Debug, Clone)]
pub struct Component {
    link: Link,
    lo: Terminal,
    hi: Terminal,
    x_lo: f64,
    x_hi: f64,
    profile: Profile,
    mesh: MeshMap,
    geometry: Geometry,
    /// Overall metric scale: the component carries `scale^2 g`.
    scale: f64,
}

fn chart_boundary(side: Side, t: &Terminal, x_lo: f64, x_hi: f64) -> Option<(f64, f64, f64)> {
    // (x at chart boundary, rho there, d rho / dx)
    let e = t.end()?;
    Some(match (side, e.kind) {
        (Side::Lo, EndKind::AC) => (-e.boundary, e.boundary, -1.0),
        (Side::Lo, EndKind::CS) => (x_lo + e.boundary, e.boundary, 1.0),
        (Side::Hi, EndKind::CS) => (x_hi - e.boundary, e.boundary, -1.0),
        (Side::Hi, EndKind::AC) => (e.boundary, e.boundary, 1.0),
    })
}

impl Component {
    /// Builds a component; the radius function and default mesh are derived from the terminals.
    pub fn new(link: Link, lo: Terminal, hi: Terminal, x_lo: f64, x_hi: f64, profile: Profile) -> Result<Component> {
        for t in [&lo, &hi] {
            if let Some(e) = t.end() {
                e.validate()?;
            }
        }
        let lo_ac = matches!(lo.end(), Some(e) if e.kind == EndKind::AC);
        let hi_ac = matches!(hi.end(), Some(e) if e.kind == EndKind::AC);
        if lo_ac != (x_lo == f64::NEG_INFINITY) || hi_ac != (x_hi == f64::INFINITY) {
            return Err(ConifoldError::InvalidInput(
                "AC ends must sit at infinite endpoints and all other terminals at finite ones".into(),
            ));
        }
        if x_lo >= x_hi {
            return Err(ConifoldError::InvalidInput(format!("empty interval [{x_lo}, {x_hi}]")));
        }
        let core = Self::build_core(&lo, &hi, x_lo, x_hi)?;
        let mesh = Self::default_mesh(&lo, &hi, x_lo, x_hi);
        let c = Component {
            link,
            lo,
            hi,
            x_lo,
            x_hi,
            profile,
            mesh,
            geometry: Geometry::Standard(core),
            scale: 1.0,
        };
        c.check_positive()?;
        Ok(c)
    }

    pub(crate) fn new_glued(link: Link, glue: Arc<GlueData>, mesh: MeshMap) -> Component {
        let (x_lo, x_hi) = glue.domain();
        Component {
            link,
            lo: glue.lo_terminal(),
            hi: glue.hi_terminal(),
            x_lo,
            x_hi,
            profile: Profile::Glued(glue.clone()),
            mesh,
            geometry: Geometry::Glued(glue),
            scale: 1.0,
        }
    }

    fn build_core(lo: &Terminal, hi: &Terminal, x_lo: f64, x_hi: f64) -> Result<Core> {
        let bl = chart_boundary(Side::Lo, lo, x_lo, x_hi);
        let bh = chart_boundary(Side::Hi, hi, x_lo, x_hi);
        let core = match (bl, bh) {
            (Some((x0, v0, s0)), Some((x1, v1, s1))) => {
                if x0 > x1 + 1e-12 * x1.abs().max(1.0) {
                    return Err(ConifoldError::InvalidInput(format!(
                        "end charts overlap: lower chart ends at {x0}, upper starts at {x1}"
                    )));
                }
                Core::Hermite { x0, x1, v0, s0, v1, s1 }
            }
            (Some((xb, v, s)), None) | (None, Some((xb, v, s))) => {
                let xc = if bl.is_some() { x_hi } else { x_lo };
                let d = xb - xc;
                if d == 0.0 {
                    return Err(ConifoldError::InvalidInput("end chart reaches the cap".into()));
                }
                let b = s / (2.0 * d);
                let a = v - b * d * d;
                if a <= 0.0 {
                    return Err(ConifoldError::InvalidInput(format!(
                        "radius function would not be positive at the cap (value {a})"
                    )));
                }
                Core::Quadratic { xc, a, b }
            }
            (None, None) => Core::Unit,
        };
        Ok(core)
    }

    fn default_mesh(lo: &Terminal, hi: &Terminal, x_lo: f64, x_hi: f64) -> MeshMap {
        use EndKind::*;
        let kind = |t: &Terminal| t.end().map(|e| e.kind);
        let bound = |t: &Terminal| t.end().map_or(1.0, |e| e.boundary);
        match (kind(lo), kind(hi)) {
            (Some(AC), Some(AC)) => MeshMap::Sinh { x0: 0.0, c: bound(lo).min(bound(hi)) },
            (Some(CS), Some(AC)) => MeshMap::Exp { x0: x_lo, s: 1.0 },
            (Some(AC), Some(CS)) => MeshMap::Exp { x0: x_hi, s: -1.0 },
            (None, Some(AC)) => MeshMap::Sinh { x0: x_lo, c: bound(hi) },
            (Some(AC), None) => MeshMap::Sinh { x0: x_hi, c: -bound(lo) },
            (Some(CS), Some(CS)) => MeshMap::LogTan { x0: x_lo, len: x_hi - x_lo },
            (Some(CS), None) => MeshMap::LogTan { x0: x_lo, len: 2.0 * (x_hi - x_lo) },
            (None, Some(CS)) => MeshMap::LogTan { x0: 2.0 * x_lo - x_hi, len: 2.0 * (x_hi - x_lo) },
            (None, None) => MeshMap::Linear { x0: x_lo, c: x_hi - x_lo },
        }
    }

    fn check_positive(&self) -> Result<()> {
        let (a, b) = self.truncated_domain(1e-3, 1e3);
        for i in 0..=400 {
            let s = i as f64 / 400.0;
            let x = a + (b - a) * s;
            let interior = x > self.x_lo() && x < self.x_hi();
            if interior && !(self.warp(x).0 > 0.0) {
                return Err(ConifoldError::NonPositiveProfile { x });
            }
            if !(self.rho(x) > 0.0) {
                return Err(ConifoldError::InvalidInput(format!("radius function not positive at x = {x}")));
            }
        }
        Ok(())
    }

    pub fn link(&self) -> &Link {
        &self.link
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo * self.scale
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi * self.scale
    }

    pub fn terminal(&self, side: Side) -> Terminal {
        match side {
            Side::Lo => self.lo.scaled(self.scale),
            Side::Hi => self.hi.scaled(self.scale),
        }
    }

    pub fn end(&self, side: Side) -> Option<EndSpec> {
        self.terminal(side).end().copied()
    }

    pub fn ends(&self) -> Vec<(Side, EndSpec)> {
        [Side::Lo, Side::Hi].into_iter().filter_map(|s| self.end(s).map(|e| (s, e))).collect()
    }

    pub fn mesh(&self) -> MeshMap {
        self.mesh.scaled(self.scale)
    }

    /// Number of grid regions: one per end plus the core.
    pub fn n_regions(&self) -> usize {
        self.ends().len() + 1
    }

    pub fn glue(&self) -> Option<&Arc<GlueData>> {
        match &self.geometry {
            Geometry::Glued(g) => Some(g),
            Geometry::Standard(_) => None,
        }
    }

    /// Base (unscaled) profile.
    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// `(f, f', f'')` of the scaled warp at `x`.
    pub fn warp(&self, x: f64) -> Jet {
        let s = self.scale;
        let (f, f1, f2) = self.profile.eval(x / s);
        (s * f, f1, f2 / s)
    }

    /// Radial end coordinate of `x` for the end on `side` (scaled metric).
    pub fn end_r(&self, side: Side, x: f64) -> Option<f64> {
        let e = self.end(side)?;
        Some(match (side, e.kind) {
            (Side::Lo, EndKind::AC) => -x,
            (Side::Lo, EndKind::CS) => x - self.x_lo(),
            (Side::Hi, EndKind::CS) => self.x_hi() - x,
            (Side::Hi, EndKind::AC) => x,
        })
    }

    /// Component coordinate of end radius `r`.
    pub fn end_x(&self, side: Side, r: f64) -> Option<f64> {
        let e = self.end(side)?;
        Some(match (side, e.kind) {
            (Side::Lo, EndKind::AC) => -r,
            (Side::Lo, EndKind::CS) => self.x_lo() + r,
            (Side::Hi, EndKind::CS) => self.x_hi() - r,
            (Side::Hi, EndKind::AC) => r,
        })
    }

    fn in_chart(&self, side: Side, x: f64) -> bool {
        match (self.end(side), self.end_r(side, x)) {
            (Some(e), Some(r)) => match e.kind {
                EndKind::CS => r <= e.boundary,
                EndKind::AC => r >= e.boundary,
            },
            _ => false,
        }
    }

    /// Radius function at `x`.
    pub fn rho(&self, x: f64) -> f64 {
        let s = self.scale;
        match &self.geometry {
            Geometry::Glued(g) => s * g.rho(x / s),
            Geometry::Standard(core) => {
                for side in [Side::Lo, Side::Hi] {
                    if self.in_chart(side, x) {
                        return self.end_r(side, x).unwrap();
                    }
                }
                s * core.eval(x / s)
            }
        }
    }

    /// Weight exponent `beta(x)`.
    pub fn beta(&self, x: f64) -> f64 {
        let xb = x / self.scale;
        match &self.geometry {
            Geometry::Glued(g) => g.beta(xb),
            Geometry::Standard(_) => {
                let bl = chart_boundary(Side::Lo, &self.lo, self.x_lo, self.x_hi);
                let bh = chart_boundary(Side::Hi, &self.hi, self.x_lo, self.x_hi);
                let (lo, hi) = (self.lo.end(), self.hi.end());
                match (bl, bh, lo, hi) {
                    (Some((x0, ..)), Some((x1, ..)), Some(el), Some(eh)) => {
                        if xb <= x0 || x1 <= x0 {
                            el.beta
                        } else if xb >= x1 {
                            eh.beta
                        } else {
                            el.beta + (eh.beta - el.beta) * (xb - x0) / (x1 - x0)
                        }
                    }
                    (_, _, Some(e), None) | (_, _, None, Some(e)) => e.beta,
                    _ => 0.0,
                }
            }
        }
    }

    /// Extra multiplicative weight factor (non-trivial on the rescaled side of a connect sum).
    pub fn weight_factor(&self, x: f64) -> f64 {
        match &self.geometry {
            Geometry::Glued(g) => g.weight_factor(x / self.scale),
            Geometry::Standard(_) => 1.0,
        }
    }

    /// Weight function `w = factor * rho^(-beta - shift)`.
    pub fn weight(&self, x: f64, shift: f64) -> f64 {
        self.weight_factor(x) * self.rho(x).powf(-(self.beta(x) + shift))
    }

    /// Finite interval covered by grids: AC ends cut at `r_max`, CS ends at `r_min`.
    pub fn truncated_domain(&self, r_min: f64, r_max: f64) -> (f64, f64) {
        let cut = |side: Side, fallback: f64| match self.end(side) {
            Some(e) => match e.kind {
                EndKind::AC => self.end_x(side, r_max.max(2.0 * e.boundary)).unwrap(),
                EndKind::CS => self.end_x(side, r_min.min(0.5 * e.boundary)).unwrap(),
            },
            None => fallback,
        };
        (cut(Side::Lo, self.x_lo()), cut(Side::Hi, self.x_hi()))
    }

    /// Returns `(t^2 g, t rho)` for this component.
    pub fn rescaled(&self, t: f64) -> Component {
        let mut c = self.clone();
        c.scale *= t;
        c
    }

    /// Sampled asymptotic constant `max |f/r - 1| / r^nu` and `max |f/r - 1|` on an end chart.
    pub fn asymptotic_deviation(&self, side: Side) -> Option<(f64, f64)> {
        let e = self.end(side)?;
        let (r0, r1) = match e.kind {
            EndKind::CS => (e.boundary * 1e-4, e.boundary),
            EndKind::AC => (e.boundary, e.boundary * 1e4),
        };
        let (mut c, mut dev) = (0.0f64, 0.0f64);
        for i in 0..=200 {
            let r = r0 * (r1 / r0).powf(i as f64 / 200.0);
            let x = self.end_x(side, r)?;
            let d = (self.warp(x).0 / r - 1.0).abs();
            dev = dev.max(d);
            c = c.max(d / r.powf(e.nu));
        }
        Some((c, dev))
    }
}

/// A conifold model: one or more radial components over links of dimension `m - 1`.
#[derive(Debug, Clone)]
pub struct ConifoldModel {
    pub name: String,
    m: usize,
    components: Vec<Component>,
}

/// Location of an end inside a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndRef {
    pub component: usize,
    pub side: Side,
    pub spec: EndSpec,
}

impl ConifoldModel {
    pub fn new(name: &str, m: usize, components: Vec<Component>) -> Result<ConifoldModel> {
        if m < 3 {
            return Err(ConifoldError::InvalidInput(format!("m = {m}: models need m >= 3")));
        }
        if components.is_empty() {
            return Err(ConifoldError::InvalidInput("a model needs at least one component".into()));
        }
        for c in &components {
            if c.link.dim() + 1 != m {
                return Err(ConifoldError::InvalidInput(format!(
                    "link {} has dimension {}, expected m - 1 = {}",
                    c.link.label(),
                    c.link.dim(),
                    m - 1
                )));
            }
            let marked: Vec<f64> = c.ends().iter().filter(|(_, e)| e.marked).map(|(_, e)| e.beta).collect();
            if marked.windows(2).any(|w| w[0] != w[1]) {
                return Err(ConifoldError::InvalidInput(
                    "marked ends of one component must share the same weight".into(),
                ));
            }
        }
        Ok(ConifoldModel { name: name.to_string(), m, components })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn ends(&self) -> Vec<EndRef> {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.ends().into_iter().map(move |(side, spec)| EndRef { component: i, side, spec }))
            .collect()
    }

    pub fn is_compact(&self) -> bool {
        self.ends().is_empty()
    }

    /// Same geometry with every end weight replaced.
    pub fn with_end_betas(&self, betas: &[f64]) -> Result<ConifoldModel> {
        let n = self.ends().len();
        if betas.len() != n {
            return Err(ConifoldError::InvalidInput(format!("{} weights for {n} ends", betas.len())));
        }
        if self.components.iter().any(|c| c.glue().is_some()) {
            return Err(ConifoldError::Unsupported("weights of a glued model are fixed by its construction".into()));
        }
        let mut out = self.clone();
        let mut k = 0;
        for c in &mut out.components {
            for t in [&mut c.lo, &mut c.hi] {
                if let Terminal::End(e) = t {
                    e.beta = betas[k];
                    k += 1;
                }
            }
        }
        ConifoldModel::new(&out.name, out.m, out.components)
    }

    pub fn with_constant_beta(&self, beta: f64) -> Result<ConifoldModel> {
        self.with_end_betas(&vec![beta; self.ends().len()])
    }

    /// The model of `(L, t^2 g)` with radius function `t rho`.
    pub fn rescale(&self, t: f64) -> Result<ConifoldModel> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ConifoldError::InvalidInput(format!("rescaling factor {t} must be positive")));
        }
        Ok(ConifoldModel {
            name: self.name.clone(),
            m: self.m,
            components: self.components.iter().map(|c| c.rescaled(t)).collect(),
        })
    }
}

/// Compatibility condition identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompatCondition {
    MarkedConesAgree,
    RadiusOrdering,
    AsymptoticBound,
    WeightsMatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatCheck {
    pub condition: CompatCondition,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub pass: bool,
    pub checks: Vec<CompatCheck>,
}

impl CompatibilityReport {
    pub fn failures(&self) -> Vec<CompatCondition> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.condition).collect()
    }

    pub fn into_result(self) -> Result<()> {
        if self.pass {
            return Ok(());
        }
        let msg: Vec<String> =
            self.checks.iter().filter(|c| !c.pass).map(|c| format!("{:?}: {}", c.condition, c.detail)).collect();
        Err(ConifoldError::Incompatible(msg.join("; ")))
    }
}

/// Largest tolerated `|f/r - 1|` on a marked chart.
pub const MARKED_DEVIATION_MAX: f64 = 0.5;

/// Checks that `l` (CS-marked) and `l_hat` (AC-marked) can be glued, pairing
/// marked ends in order.
pub fn check_compatible(l: &ConifoldModel, l_hat: &ConifoldModel) -> CompatibilityReport {
    let cs: Vec<EndRef> = l.ends().into_iter().filter(|e| e.spec.marked).collect();
    let ac: Vec<EndRef> = l_hat.ends().into_iter().filter(|e| e.spec.marked).collect();
    let mut checks = Vec::new();

    let mut cones = Vec::new();
    if l.m() != l_hat.m() {
        cones.push(format!("dimensions differ: {} vs {}", l.m(), l_hat.m()));
    }
    if cs.is_empty() || cs.len() != ac.len() {
        cones.push(format!("{} marked CS ends vs {} marked AC ends", cs.len(), ac.len()));
    }
    for (a, b) in cs.iter().zip(&ac) {
        if a.spec.kind != EndKind::CS || b.spec.kind != EndKind::AC {
            cones.push("marked ends must be CS on the host and AC on the partner".into());
        }
        let (la, lb) = (l.components[a.component].link(), l_hat.components[b.component].link());
        if la != lb {
            cones.push(format!("links differ: {} vs {}", la.label(), lb.label()));
        }
    }
    checks.push(CompatCheck {
        condition: CompatCondition::MarkedConesAgree,
        pass: cones.is_empty(),
        detail: if cones.is_empty() { "marked cones agree".into() } else { cones.join("; ") },
    });

    let bad: Vec<String> = cs
        .iter()
        .zip(&ac)
        .filter(|(a, b)| !(b.spec.boundary < a.spec.boundary))
        .map(|(a, b)| format!("R_hat = {} >= epsilon = {}", b.spec.boundary, a.spec.boundary))
        .collect();
    checks.push(CompatCheck {
        condition: CompatCondition::RadiusOrdering,
        pass: bad.is_empty(),
        detail: if bad.is_empty() { "R_hat < epsilon on every pair".into() } else { bad.join("; ") },
    });

    let mut asym = Vec::new();
    for (model, ends) in [(l, &cs), (l_hat, &ac)] {
        for e in ends.iter() {
            if let Some((c, dev)) = model.components[e.component].asymptotic_deviation(e.side) {
                if !c.is_finite() || dev > MARKED_DEVIATION_MAX {
                    asym.push(format!("{}: C = {c:.3e}, max |f/r - 1| = {dev:.3}", model.name));
                }
            }
        }
    }
    checks.push(CompatCheck {
        condition: CompatCondition::AsymptoticBound,
        pass: asym.is_empty(),
        detail: if asym.is_empty() { "marked charts are close to their cones".into() } else { asym.join("; ") },
    });

    let wm: Vec<String> = cs
        .iter()
        .zip(&ac)
        .filter(|(a, b)| a.spec.beta != b.spec.beta)
        .map(|(a, b)| format!("beta = {} vs beta_hat = {}", a.spec.beta, b.spec.beta))
        .collect();
    checks.push(CompatCheck {
        condition: CompatCondition::WeightsMatch,
        pass: wm.is_empty(),
        detail: if wm.is_empty() { "marked weights agree".into() } else { wm.join("; ") },
    });

    CompatibilityReport { pass: checks.iter().all(|c| c.pass), checks }
}

/// Logarithmic cutoff `eta_t(r) = eta(log r / log t)`: 0 for `r <= t^a`, 1 for `r >= t^b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub t: f64,
    pub a: f64,
    pub b: f64,
}

/// Builds the cutoff used to transplant functions across the neck.
pub fn cutoff_eta(t: f64, a: f64, b: f64) -> Result<Cutoff> {
    if !(t > 0.0 && t < 1.0) {
        return Err(ConifoldError::GluingParameter(format!("cutoff needs 0 < t < 1, got {t}")));
    }
    if !(0.0 < b && b < a) {
        return Err(ConifoldError::GluingParameter(format!("cutoff needs 0 < b < a, got a = {a}, b = {b}")));
    }
    Ok(Cutoff { t, a, b })
}

impl Cutoff {
    /// Profile `eta(x)`: 1 for `x <= b`, 0 for `x >= a`.
    fn eta(&self, x: f64) -> Jet {
        let w = self.a - self.b;
        let (s, s1, s2) = smoothstep_inf((x - self.b) / w);
        (1.0 - s, -s1 / w, -s2 / (w * w))
    }

    /// `(eta_t, d eta_t / dr, d^2 eta_t / dr^2)` at `r`.
    pub fn eval(&self, r: f64) -> Jet {
        let lt = self.t.ln();
        let (e, e1, e2) = self.eta(r.ln() / lt);
        let d1 = e1 / (r * lt);
        let d2 = e2 / (r * lt).powi(2) - e1 / (r * r * lt);
        (e, d1, d2)
    }

    /// `(r eta_t', r^2 eta_t'')`, evaluated without cancellation.
    pub fn scaled_derivatives(&self, r: f64) -> (f64, f64) {
        let lt = self.t.ln();
        let (_, e1, e2) = self.eta(r.ln() / lt);
        (e1 / lt, e2 / (lt * lt) - e1 / lt)
    }

    /// Support interval `[t^a, t^b]` of the derivatives.
    pub fn transition(&self) -> (f64, f64) {
        (self.t.powf(self.a), self.t.powf(self.b))
    }

    /// `(max |r eta_t'|, max |r^2 eta_t''|)` over the transition, by dense sampling.
    pub fn derivative_maxima(&self, samples: usize) -> (f64, f64) {
        Cutoff::derivative_maxima_at_log(self.t.ln(), self.a, self.b, samples)
    }

    /// Same maxima with `t` given through `log t`, so that `t` may underflow.
    pub fn derivative_maxima_at_log(log_t: f64, a: f64, b: f64, samples: usize) -> (f64, f64) {
        let c = Cutoff { t: f64::NAN, a, b };
        let (mut m1, mut m2) = (0.0f64, 0.0f64);
        for i in 0..=samples {
            let x = b + (a - b) * i as f64 / samples as f64;
            let (_, e1, e2) = c.eta(x);
            m1 = m1.max((e1 / log_t).abs());
            m2 = m2.max((e2 / (log_t * log_t) - e1 / log_t).abs());
        }
        (m1, m2)
    }
}
