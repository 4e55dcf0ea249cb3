//! Canonical benchmark models.

use super::{Component, ConifoldModel, EndSpec, GluedFamily, InterpolationRule, Profile, Terminal};
use crate::error::{ConifoldError, Result};
use crate::link_spectra::Link;

/// Default gluing parameters shared by the benchmarks.
pub const TAU: f64 = 0.5;
pub const CUT_A: f64 = 0.4;
pub const CUT_B: f64 = 0.2;
pub const T_SWEEP: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// Core region of the spindle used by the constraint transverse to constants,
/// in half-domain coordinates.
pub const SPINDLE_CORE: (f64, f64) = (1.2, std::f64::consts::FRAC_PI_2);

fn s2() -> Link {
    Link::unit_sphere(2).expect("unit sphere is valid")
}

/// Exact cone over S^2 with a CS end (`epsilon`) and an AC end (`R`).
pub fn exact_cone(beta: f64, eps: f64, r: f64, mark_cs: bool) -> Result<ConifoldModel> {
    let mut cs = EndSpec::cs(1.0, beta, eps);
    cs.marked = mark_cs;
    let c = Component::new(
        s2(),
        Terminal::End(cs),
        Terminal::End(EndSpec::ac(-1.0, beta, r)),
        0.0,
        f64::INFINITY,
        Profile::ExactCone,
    )?;
    ConifoldModel::new("exact_cone", 3, vec![c])
}

/// `R x S^2` with `f = sqrt(x^2 + c^2)` and two AC ends at `|x| = R`.
pub fn hyperboloid(c: f64, beta: f64, r: f64, marked: (bool, bool)) -> Result<ConifoldModel> {
    let mut lo = EndSpec::ac(-2.0, beta, r);
    let mut hi = EndSpec::ac(-2.0, beta, r);
    lo.marked = marked.0;
    hi.marked = marked.1;
    let comp = Component::new(
        s2(),
        Terminal::End(lo),
        Terminal::End(hi),
        f64::NEG_INFINITY,
        f64::INFINITY,
        Profile::Hyperboloid { c },
    )?;
    ConifoldModel::new("hyperboloid", 3, vec![comp])
}

/// Hyperboloid profile on `[0, inf)` closed by a cap at `x = 0`, one AC end.
pub fn capped_hyperboloid(beta: f64) -> Result<ConifoldModel> {
    let c = Component::new(
        s2(),
        Terminal::Cap,
        Terminal::End(EndSpec::ac(-2.0, beta, 1.0)),
        0.0,
        f64::INFINITY,
        Profile::Hyperboloid { c: 1.0 },
    )?;
    ConifoldModel::new("capped_hyperboloid", 3, vec![c])
}

/// `(0, pi) x S^2` with `f = sin x` and two CS ends.
pub fn sine_spindle(beta: f64, eps: f64, marked: bool) -> Result<ConifoldModel> {
    let mut e = EndSpec::cs(2.0, beta, eps);
    e.marked = marked;
    let c = Component::new(s2(), Terminal::End(e), Terminal::End(e), 0.0, std::f64::consts::PI, Profile::SineSpindle)?;
    ConifoldModel::new("sine_spindle", 3, vec![c])
}

/// Non-compact benchmark: exact cone with a hyperboloid glued into its tip.
pub fn dumbbell(beta: f64) -> Result<GluedFamily> {
    let l = exact_cone(beta, 2.0, 2.0, true)?;
    let l_hat = hyperboloid(1.0, beta, 1.0, (false, true))?;
    Ok(GluedFamily {
        l,
        l_hat,
        tau: TAU,
        a: CUT_A,
        b: CUT_B,
        rule: InterpolationRule::QuinticLog,
        t_list: T_SWEEP.to_vec(),
    })
}

/// Compact benchmark: a hyperboloid neck closing both tips of the sine spindle.
pub fn spindle(beta: f64) -> Result<GluedFamily> {
    Ok(GluedFamily {
        l: sine_spindle(beta, 1.2, true)?,
        l_hat: hyperboloid(1.0, beta, 1.0, (true, true))?,
        tau: TAU,
        a: CUT_A,
        b: CUT_B,
        rule: InterpolationRule::QuinticLog,
        t_list: T_SWEEP.to_vec(),
    })
}

/// Glued family by preset name.
pub fn family(name: &str, beta: f64) -> Result<GluedFamily> {
    match name {
        "dumbbell" => dumbbell(beta),
        "spindle" => spindle(beta),
        _ => Err(ConifoldError::Config(format!("unknown model preset '{name}' (expected dumbbell or spindle)"))),
    }
}

/// Single (unglued) model by preset name.
pub fn model(name: &str, beta: f64) -> Result<ConifoldModel> {
    match name {
        "exact_cone" => exact_cone(beta, 1.0, 1.0, false),
        "capped_hyperboloid" => capped_hyperboloid(beta),
        "hyperboloid" => hyperboloid(1.0, beta, 1.0, (false, false)),
        "sine_spindle" => sine_spindle(beta, 1.2, false),
        _ => Err(ConifoldError::Config(format!("unknown single-model preset '{name}'"))),
    }
}
