//! The t-parametrised connect sum: a rescaled AC partner inserted at a CS tip.
//!
//! The host `L` must carry its marked CS end at the lower terminal with tip
//! `x = 0`; the partner `L_hat` carries its marked AC end at the upper
//! terminal. In host coordinates the partner sits at `x = t s`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::profile::{Jet, Profile};
use super::{check_compatible, Component, ConifoldModel, EndKind, MeshMap, Side, Terminal};
use crate::error::{ConifoldError, Result};
use crate::numerics::{smoothstep5, smoothstep_inf};

/// Smooth step in `log r` used on the band `[t^tau, 2 t^tau]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationRule {
    /// Quintic C^2 step.
    #[default]
    QuinticLog,
    /// C^infinity step.
    SmoothLog,
}

impl InterpolationRule {
    fn step(&self, s: f64) -> Jet {
        match self {
            InterpolationRule::QuinticLog => smoothstep5(s),
            InterpolationRule::SmoothLog => smoothstep_inf(s),
        }
    }
}

/// Everything needed to evaluate one member of the glued family.
#[derive(Debug, Clone)]
pub struct GlueData {
    pub t: f64,
    pub tau: f64,
    pub rule: InterpolationRule,
    host: Component,
    /// Partner rescaled by `t`.
    hat: Component,
    hat_warp: Profile,
    pub eps: f64,
    /// `t R_hat`.
    pub neck_start: f64,
    pub beta_neck: f64,
}

impl GlueData {
    /// Interpolation band `[t^tau, 2 t^tau]`.
    pub fn band(&self) -> (f64, f64) {
        let a = self.t.powf(self.tau);
        (a, 2.0 * a)
    }

    /// Neck `[t R_hat, epsilon]`.
    pub fn neck(&self) -> (f64, f64) {
        (self.neck_start, self.eps)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.hat.x_lo(), self.host.x_hi())
    }

    pub fn lo_terminal(&self) -> Terminal {
        self.hat.terminal(Side::Lo)
    }

    pub fn hi_terminal(&self) -> Terminal {
        self.host.terminal(Side::Hi)
    }

    pub fn is_exact_cone(&self) -> bool {
        self.hat_warp.is_exact_cone() && self.host.profile().is_exact_cone()
    }

    /// Blend weight `chi(r)` of the partner and its r-derivatives.
    fn chi(&self, r: f64) -> Jet {
        let (lo, _) = self.band();
        if r <= lo {
            return (1.0, 0.0, 0.0);
        }
        let l2 = std::f64::consts::LN_2;
        let u = (r / lo).ln() / l2;
        if u >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let (s, s1, s2) = self.rule.step(u);
        (1.0 - s, -s1 / (r * l2), -s2 / (r * l2).powi(2) + s1 / (r * r * l2))
    }

    /// `t^2 f_hat(x/t)^2` and its first two derivatives.
    pub fn hat_squared(&self, x: f64) -> Jet {
        let (a, a1, a2) = self.hat_warp.eval(x);
        (a * a, 2.0 * a * a1, 2.0 * (a1 * a1 + a * a2))
    }

    fn host_squared(&self, x: f64) -> Jet {
        let (b, b1, b2) = self.host.warp(x);
        (b * b, 2.0 * b * b1, 2.0 * (b1 * b1 + b * b2))
    }

    /// `f_t^2` and its first two derivatives.
    pub fn warp_squared(&self, x: f64) -> Jet {
        let (c, c1, c2) = if x <= 0.0 { (1.0, 0.0, 0.0) } else { self.chi(x) };
        if c == 1.0 {
            return self.hat_squared(x);
        }
        if c == 0.0 {
            return self.host_squared(x);
        }
        let (a, a1, a2) = self.hat_squared(x);
        let (b, b1, b2) = self.host_squared(x);
        // Written as corrections to the host so identical branches blend exactly.
        (
            b + c * (a - b),
            b1 + c * (a1 - b1) + c1 * (a - b),
            b2 + c * (a2 - b2) + 2.0 * c1 * (a1 - b1) + c2 * (a - b),
        )
    }

    pub fn warp(&self, x: f64) -> Jet {
        let (c, _, _) = if x <= 0.0 { (1.0, 0.0, 0.0) } else { self.chi(x) };
        if c == 1.0 {
            return self.hat_warp.eval(x);
        }
        if c == 0.0 {
            return self.host.warp(x);
        }
        let (ff, f1, f2) = self.warp_squared(x);
        let f = ff.sqrt();
        let d1 = f1 / (2.0 * f);
        (f, d1, (f2 - 2.0 * d1 * d1) / (2.0 * f))
    }

    pub fn rho(&self, x: f64) -> f64 {
        if x <= self.neck_start {
            self.hat.rho(x)
        } else if x <= self.eps {
            x
        } else {
            self.host.rho(x)
        }
    }

    pub fn beta(&self, x: f64) -> f64 {
        if x <= self.neck_start {
            self.hat.beta(x)
        } else if x <= self.eps {
            self.beta_neck
        } else {
            self.host.beta(x)
        }
    }

    /// `t^(beta_hat - beta_neck)` on the partner side, 1 elsewhere.
    pub fn weight_factor(&self, x: f64) -> f64 {
        if x <= self.neck_start {
            self.t.powf(self.hat.beta(x) - self.beta_neck)
        } else {
            1.0
        }
    }
}

/// Host model, partner model and the parameters of the glued family.
#[derive(Debug, Clone)]
pub struct GluedFamily {
    pub l: ConifoldModel,
    pub l_hat: ConifoldModel,
    pub tau: f64,
    pub a: f64,
    pub b: f64,
    pub rule: InterpolationRule,
    pub t_list: Vec<f64>,
}

impl GluedFamily {
    pub fn member(&self, t: f64) -> Result<ConifoldModel> {
        let n = self.l.ends().iter().filter(|e| e.spec.marked).count();
        parametric_connect_sum(&self.l, &self.l_hat, &vec![t; n], self.tau, self.rule)
    }
}

fn check_symmetric(c: &Component) -> Result<Component> {
    let (lo, hi) = (c.end(Side::Lo), c.end(Side::Hi));
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err(ConifoldError::Unsupported("symmetric gluing needs two ends per component".into()));
    };
    if lo.kind != hi.kind || lo.boundary != hi.boundary || lo.beta != hi.beta || lo.nu != hi.nu {
        return Err(ConifoldError::Unsupported("two-sided gluing needs identical end data".into()));
    }
    let (a, b) = (c.x_lo(), c.x_hi());
    let mid = match lo.kind {
        EndKind::CS => 0.5 * (a + b),
        EndKind::AC => 0.0,
    };
    let reflect = |x: f64| 2.0 * mid - x;
    for i in 1..50 {
        let x = match lo.kind {
            EndKind::CS => a + (mid - a) * i as f64 / 50.0,
            EndKind::AC => 0.1 * i as f64,
        };
        let (f, g) = (c.warp(x).0, c.warp(reflect(x)).0);
        if (f - g).abs() > 1e-12 * f.abs().max(1.0) {
            return Err(ConifoldError::Unsupported("two-sided gluing needs a reflection-symmetric profile".into()));
        }
    }
    let (lo_t, hi_t, x0, x1) = match lo.kind {
        EndKind::CS => (Terminal::End(lo), Terminal::Mirror, a, mid),
        EndKind::AC => (Terminal::Mirror, Terminal::End(hi), 0.0, f64::INFINITY),
    };
    Component::new(c.link().clone(), lo_t, hi_t, x0, x1, c.profile().scaled(c.scale()))
}

/// Builds `L_t` from a CS-marked host and an AC-marked partner.
///
/// Two-sided gluing of reflection-symmetric models (both host ends marked,
/// partner with two marked ends) is carried out on half the domain with
/// mirror terminals.
pub fn parametric_connect_sum(
    l: &ConifoldModel,
    l_hat: &ConifoldModel,
    t_vector: &[f64],
    tau: f64,
    rule: InterpolationRule,
) -> Result<ConifoldModel> {
    check_compatible(l, l_hat).into_result()?;
    if l.components().len() != 1 || l_hat.components().len() != 1 {
        return Err(ConifoldError::Unsupported("gluing supports one host and one partner component".into()));
    }
    let pairs = l.ends().iter().filter(|e| e.spec.marked).count();
    if t_vector.len() != pairs {
        return Err(ConifoldError::GluingParameter(format!(
            "{} gluing parameters for {pairs} marked pairs",
            t_vector.len()
        )));
    }
    if t_vector.windows(2).any(|w| w[0] != w[1]) {
        return Err(ConifoldError::GluingParameter(
            "gluing parameters must agree on ends of one partner component".into(),
        ));
    }
    let t = t_vector[0];
    if !(0.0 < t && t < 1.0) || !(0.0 < tau && tau < 1.0) {
        return Err(ConifoldError::GluingParameter(format!("need 0 < t < 1 and 0 < tau < 1, got t = {t}, tau = {tau}")));
    }
    let (host, hat, name) = match pairs {
        1 => (l.components()[0].clone(), l_hat.components()[0].clone(), "glued"),
        2 => (check_symmetric(&l.components()[0])?, check_symmetric(&l_hat.components()[0])?, "glued_half"),
        _ => return Err(ConifoldError::Unsupported("at most two marked pairs".into())),
    };
    let host_end = host.end(Side::Lo).filter(|e| e.marked && e.kind == EndKind::CS);
    let hat_end = hat.end(Side::Hi).filter(|e| e.marked && e.kind == EndKind::AC);
    let (Some(host_end), Some(hat_end)) = (host_end, hat_end) else {
        return Err(ConifoldError::Unsupported(
            "host must carry its marked CS end at the lower terminal, partner its marked AC end at the upper".into(),
        ));
    };
    if host.x_lo() != 0.0 {
        return Err(ConifoldError::Unsupported("the marked CS tip must sit at x = 0".into()));
    }
    let eps = host_end.boundary;
    let neck_start = t * hat_end.boundary;
    let band_lo = t.powf(tau);
    if !(neck_start < band_lo && 2.0 * band_lo < eps) {
        return Err(ConifoldError::GluingParameter(format!(
            "ordering t R_hat < t^tau < 2 t^tau < epsilon fails: {neck_start} < {band_lo} < {} < {eps}",
            2.0 * band_lo
        )));
    }
    let hat_warp = hat.profile().scaled(t * hat.scale());
    let hat = hat.rescaled(t);
    let glue = Arc::new(GlueData {
        t,
        tau,
        rule,
        host,
        hat,
        hat_warp,
        eps,
        neck_start,
        beta_neck: host_end.beta,
    });
    let (x_lo, x_hi) = glue.domain();
    for i in 0..=2000 {
        let s = i as f64 / 2000.0;
        let x = if x_lo.is_finite() { x_lo + (eps - x_lo) * s } else { -eps + 2.0 * eps * s };
        let f = glue.warp(x).0;
        if !(f > 0.0) && x > x_lo && x < x_hi {
            return Err(ConifoldError::NonPositiveProfile { x });
        }
    }
    let mesh = MeshMap::Sinh { x0: 0.0, c: neck_start };
    let comp = Component::new_glued(l.components()[0].link().clone(), glue, mesh);
    ConifoldModel::new(&format!("{name}[{}+{}](t={t})", l.name, l_hat.name), l.m(), vec![comp])
}

/// One row of the neck table: `sup |r^j d^j (f_t^2 - t^2 f_hat^2)| / (t^2 f_hat^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeckRow {
    pub t: f64,
    pub j: usize,
    pub sup: f64,
}

/// Sup over `[t R_hat, t^b]` of the scaled warp defect, for `j <= j_max` (at most 2).
pub fn neck_convergence_check(glued: &ConifoldModel, j_max: usize, b: f64) -> Result<Vec<NeckRow>> {
    let comp = &glued.components()[0];
    let g = comp
        .glue()
        .ok_or_else(|| ConifoldError::InvalidInput("neck check needs a glued model".into()))?;
    if j_max > 2 {
        return Err(ConifoldError::Unsupported("derivatives beyond second order".into()));
    }
    let (r0, r1) = (g.neck_start, g.t.powf(b).max(g.neck_start));
    let n = 4000;
    let mut sup = vec![0.0f64; j_max + 1];
    for i in 0..=n {
        let r = r0 * (r1 / r0).powf(i as f64 / n as f64);
        let (f, f1, f2) = g.warp_squared(r);
        let (a, a1, a2) = g.hat_squared(r);
        let d = [f - a, r * (f1 - a1), r * r * (f2 - a2)];
        for j in 0..=j_max {
            sup[j] = sup[j].max(d[j].abs() / a);
        }
    }
    Ok(sup.into_iter().enumerate().map(|(j, s)| NeckRow { t: g.t, j, sup: s }).collect())
}
