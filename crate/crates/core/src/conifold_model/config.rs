//! JSON description of models and glued families.
//!
//! ```json
//! {"m": 3,
//!  "components": [{"ends": [{"kind": "CS", "link": "sphere:2", "nu": 1, "beta": -0.5,
//!                            "boundary": 2, "marked": true}, ...],
//!                  "profile": "exact_cone", "core_boundary": "none"}, ...],
//!  "tau": 0.5, "a": 0.4, "b": 0.2, "t_list": [0.1, 0.01]}
//! ```
//! With two components the first is the CS-marked host and the second the
//! AC-marked partner.

use serde::{Deserialize, Serialize};

use super::{
    presets, Component, ConifoldModel, EndKind, EndSpec, GluedFamily, InterpolationRule, Profile, ProfileSpec, Side,
    Terminal,
};
use crate::error::{ConifoldError, Result};
use crate::link_spectra::Link;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndConfig {
    pub kind: EndKind,
    pub link: String,
    pub nu: f64,
    pub beta: f64,
    pub boundary: f64,
    #[serde(default)]
    pub marked: bool,
    #[serde(default)]
    pub side: Option<Side>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileField {
    Name(String),
    Spec(ProfileSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoreBoundary {
    #[default]
    None,
    Cap,
    Mirror,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    #[serde(default)]
    pub ends: Vec<EndConfig>,
    pub profile: ProfileField,
    #[serde(default)]
    pub core_boundary: CoreBoundary,
    /// Link for components without ends.
    #[serde(default)]
    pub link: Option<String>,
    /// Explicit `[x_lo, x_hi]`; `null` marks an infinite endpoint.
    #[serde(default)]
    pub domain: Option<(Option<f64>, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub m: usize,
    pub components: Vec<ComponentConfig>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub t_list: Option<Vec<f64>>,
    #[serde(default)]
    pub interpolation: InterpolationRule,
}

fn cfg_err(msg: impl Into<String>) -> ConifoldError {
    ConifoldError::Config(msg.into())
}

fn build_component(c: &ComponentConfig) -> Result<Component> {
    let spec = match &c.profile {
        ProfileField::Name(n) => ProfileSpec::parse(n).map_err(cfg_err)?,
        ProfileField::Spec(s) => s.clone(),
    };
    let profile = Profile::from_spec(&spec).map_err(cfg_err)?;
    let link_name = c
        .ends
        .first()
        .map(|e| e.link.clone())
        .or_else(|| c.link.clone())
        .ok_or_else(|| cfg_err("a component without ends needs a 'link' field"))?;
    if c.ends.iter().any(|e| e.link != link_name) {
        return Err(cfg_err("all ends of one component must share its link"));
    }
    let link = Link::parse_spec(&link_name)?;
    let (mut x_lo, mut x_hi) = match c.domain {
        Some((a, b)) => (a.unwrap_or(f64::NEG_INFINITY), b.unwrap_or(f64::INFINITY)),
        None => profile.natural_domain(),
    };
    if c.ends.len() > 2 {
        return Err(cfg_err("a radial component has at most two ends"));
    }
    let mut sides: [Option<EndSpec>; 2] = [None, None];
    let mut place = |side: Side, e: EndSpec| -> Result<()> {
        let slot = &mut sides[side as usize];
        if slot.is_some() {
            return Err(cfg_err(format!("two ends on side {side:?}")));
        }
        *slot = Some(e);
        Ok(())
    };
    for (i, e) in c.ends.iter().enumerate() {
        let spec = EndSpec { kind: e.kind, nu: e.nu, beta: e.beta, boundary: e.boundary, marked: e.marked };
        let side = match e.side {
            Some(s) => s,
            None if c.ends.len() == 2 => [Side::Lo, Side::Hi][i],
            None => match e.kind {
                EndKind::AC if x_hi == f64::INFINITY => Side::Hi,
                EndKind::AC => Side::Lo,
                EndKind::CS => Side::Lo,
            },
        };
        place(side, spec)?;
    }
    let fill = |end: Option<EndSpec>| -> Result<Terminal> {
        match (end, c.core_boundary) {
            (Some(e), _) => Ok(Terminal::End(e)),
            (None, CoreBoundary::Cap) => Ok(Terminal::Cap),
            (None, CoreBoundary::Mirror) => Ok(Terminal::Mirror),
            (None, CoreBoundary::None) => Err(cfg_err("a side without an end needs core_boundary cap or mirror")),
        }
    };
    let lo = fill(sides[0])?;
    let hi = fill(sides[1])?;
    // An infinite side without an AC end is cut at x = 0.
    let is_ac = |t: &Terminal| matches!(t.end(), Some(e) if e.kind == EndKind::AC);
    if x_lo == f64::NEG_INFINITY && !is_ac(&lo) {
        x_lo = 0.0;
    }
    if x_hi == f64::INFINITY && !is_ac(&hi) {
        x_hi = 0.0;
    }
    Component::new(link, lo, hi, x_lo, x_hi, profile)
}

/// Either a single model or a host/partner pair with gluing parameters.
#[derive(Debug, Clone)]
pub enum ModelSource {
    Single(ConifoldModel),
    Family(GluedFamily),
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<ModelConfig> {
        serde_json::from_str(text).map_err(|e| cfg_err(format!("model config: {e}")))
    }

    pub fn build(&self) -> Result<ModelSource> {
        let comps: Vec<Component> = self.components.iter().map(build_component).collect::<Result<_>>()?;
        match comps.len() {
            1 => Ok(ModelSource::Single(ConifoldModel::new("custom", self.m, comps)?)),
            2 => {
                let mut it = comps.into_iter();
                let l = ConifoldModel::new("host", self.m, vec![it.next().unwrap()])?;
                let l_hat = ConifoldModel::new("partner", self.m, vec![it.next().unwrap()])?;
                Ok(ModelSource::Family(GluedFamily {
                    l,
                    l_hat,
                    tau: self.tau.unwrap_or(presets::TAU),
                    a: self.a.unwrap_or(presets::CUT_A),
                    b: self.b.unwrap_or(presets::CUT_B),
                    rule: self.interpolation,
                    t_list: self.t_list.clone().unwrap_or_else(|| presets::T_SWEEP.to_vec()),
                }))
            }
            n => Err(cfg_err(format!("expected one model or a host/partner pair, got {n} components"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_capped_hyperboloid_from_json() {
        let cfg = ModelConfig::from_json(
            r#"{"m": 3, "components": [{"ends": [{"kind": "AC", "link": "sphere:2", "nu": -2,
                 "beta": 0.5, "boundary": 1}], "profile": "hyperboloid(1)", "core_boundary": "cap"}]}"#,
        )
        .unwrap();
        let ModelSource::Single(m) = cfg.build().unwrap() else { panic!("expected a single model") };
        let c = &m.components()[0];
        assert_eq!(c.terminal(Side::Lo), Terminal::Cap);
        assert_eq!(c.x_lo(), 0.0);
        assert!((c.rho(0.0) - 0.5).abs() < 1e-15);
    }
}
