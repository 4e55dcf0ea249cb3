//! Warp profiles `f` of warped-product metrics `dx^2 + f(x)^2 g'`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::glue::GlueData;
use crate::numerics::CubicSpline;

/// Value and first two derivatives of a scalar function.
pub type Jet = (f64, f64, f64);

#[derive(Debug, Clone)]
pub enum Profile {
    /// `f(x) = x`.
    ExactCone,
    /// `f(x) = sqrt(x^2 + c^2)`.
    Hyperboloid { c: f64 },
    /// `f(x) = sin x` on `(0, pi)`.
    SineSpindle,
    /// `f(x) = x (1 + c x^nu)` for `x > 0`.
    PerturbedCone { c: f64, nu: f64 },
    /// Clamped cubic spline through knots, linear beyond them.
    Spline(Arc<CubicSpline>),
    /// `t f(x / t)`.
    Scaled { t: f64, inner: Box<Profile> },
    /// Interpolated profile of a connect sum.
    Glued(Arc<GlueData>),
}

/// Serializable description of the analytic profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProfileSpec {
    ExactCone,
    Hyperboloid { c: f64 },
    SineSpindle,
    PerturbedCone { c: f64, nu: f64 },
    Spline { x: Vec<f64>, f: Vec<f64>, slopes: Option<(f64, f64)> },
}

impl Profile {
    pub fn eval(&self, x: f64) -> Jet {
        match self {
            Profile::ExactCone => (x, 1.0, 0.0),
            Profile::Hyperboloid { c } => {
                let f = x.hypot(*c);
                (f, x / f, c * c / (f * f * f))
            }
            Profile::SineSpindle => (x.sin(), x.cos(), -x.sin()),
            Profile::PerturbedCone { c, nu } => {
                let p = x.powf(*nu);
                (x * (1.0 + c * p), 1.0 + c * (1.0 + nu) * p, c * (1.0 + nu) * nu * p / x)
            }
            Profile::Spline(s) => s.eval(x),
            Profile::Scaled { t, inner } => {
                let (f, f1, f2) = inner.eval(x / t);
                (t * f, f1, f2 / t)
            }
            Profile::Glued(g) => g.warp(x),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    /// `t f(x / t)`, collapsing nested scalings and using closed forms where they exist.
    pub fn scaled(&self, t: f64) -> Profile {
        if t == 1.0 {
            return self.clone();
        }
        match self {
            Profile::ExactCone => Profile::ExactCone,
            Profile::Hyperboloid { c } => Profile::Hyperboloid { c: c * t },
            Profile::Scaled { t: s, inner } => inner.scaled(s * t),
            other => Profile::Scaled { t, inner: Box::new(other.clone()) },
        }
    }

    /// True when the profile is exactly `f(x) = x`.
    pub fn is_exact_cone(&self) -> bool {
        match self {
            Profile::ExactCone => true,
            Profile::PerturbedCone { c, .. } => *c == 0.0,
            Profile::Scaled { inner, .. } => inner.is_exact_cone(),
            Profile::Glued(g) => g.is_exact_cone(),
            _ => false,
        }
    }

    pub fn from_spec(spec: &ProfileSpec) -> Result<Profile, String> {
        Ok(match spec {
            ProfileSpec::ExactCone => Profile::ExactCone,
            ProfileSpec::Hyperboloid { c } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(format!("hyperboloid parameter c = {c} must be positive"));
                }
                Profile::Hyperboloid { c: *c }
            }
            ProfileSpec::SineSpindle => Profile::SineSpindle,
            ProfileSpec::PerturbedCone { c, nu } => Profile::PerturbedCone { c: *c, nu: *nu },
            ProfileSpec::Spline { x, f, slopes } => Profile::Spline(Arc::new(CubicSpline::new(x, f, *slopes)?)),
        })
    }

    /// Natural domain of the analytic profile.
    pub fn natural_domain(&self) -> (f64, f64) {
        match self {
            Profile::ExactCone | Profile::PerturbedCone { .. } => (0.0, f64::INFINITY),
            Profile::Hyperboloid { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Profile::SineSpindle => (0.0, std::f64::consts::PI),
            Profile::Spline(s) => {
                let (x, _) = s.knots();
                (x[0], x[x.len() - 1])
            }
            Profile::Scaled { t, inner } => {
                let (a, b) = inner.natural_domain();
                (a * t, b * t)
            }
            Profile::Glued(g) => g.domain(),
        }
    }
}

impl ProfileSpec {
    /// Parses `exact_cone`, `hyperboloid(c)`, `sine_spindle`, `perturbed_cone(c,nu)`.
    pub fn parse(name: &str) -> Result<ProfileSpec, String> {
        let name = name.trim();
        let (head, args) = match name.find('(') {
            Some(i) if name.ends_with(')') => (&name[..i], Some(&name[i + 1..name.len() - 1])),
            _ => (name, None),
        };
        let nums: Vec<f64> = match args {
            Some(a) if !a.trim().is_empty() => a
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad number '{v}' in profile '{name}'")))
                .collect::<Result<_, _>>()?,
            _ => Vec::new(),
        };
        match (head.trim(), nums.as_slice()) {
            ("exact_cone", []) => Ok(ProfileSpec::ExactCone),
            ("hyperboloid", []) => Ok(ProfileSpec::Hyperboloid { c: 1.0 }),
            ("hyperboloid", [c]) => Ok(ProfileSpec::Hyperboloid { c: *c }),
            ("sine_spindle", []) => Ok(ProfileSpec::SineSpindle),
            ("perturbed_cone", [c, nu]) => Ok(ProfileSpec::PerturbedCone { c: *c, nu: *nu }),
            _ => Err(format!("unknown profile preset '{name}'")),
        }
    }
}
