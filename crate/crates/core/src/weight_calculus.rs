//! Exceptional weights of the Laplacian on cones, Fredholm tests, index
//! changes and the qualitative region classification by end type.

use serde::{Deserialize, Serialize};

use crate::error::{ConifoldError, Result};
use crate::link_spectra::Link;

/// Default distance below which a weight counts as exceptional.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndKind {
    /// Conically singular end, r -> 0.
    CS,
    /// Asymptotically conical end, r -> infinity.
    AC,
}

/// A growth rate at which homogeneous harmonic functions exist on a cone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalWeight {
    pub gamma: f64,
    pub mult: u64,
    pub source_eigenvalue: f64,
    pub end_index: usize,
}

/// Exceptional weights of one end, computed over a known interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalSet {
    pub range: (f64, f64),
    pub weights: Vec<ExceptionalWeight>,
}

/// An end as seen by the index arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct EndDesc {
    pub kind: EndKind,
    pub link: Link,
}

/// Roots `(gamma_plus, gamma_minus)` of `g^2 + (m-2) g = e`.
pub fn exceptional_roots(m: usize, e: f64) -> (f64, f64) {
    let b = 2.0 - m as f64;
    let disc = (b * b + 4.0 * e).sqrt();
    // Stable evaluation: take the root without cancellation, the other from Vieta.
    if b <= 0.0 {
        let gm = (b - disc) / 2.0;
        let gp = if gm != 0.0 { -e / gm } else { 0.0 };
        (gp, gm)
    } else {
        let gp = (b + disc) / 2.0;
        let gm = if gp != 0.0 { -e / gp } else { 0.0 };
        (gp, gm)
    }
}

/// Largest link eigenvalue whose roots can reach `[lo, hi]`.
pub fn eigenvalue_cap(m: usize, lo: f64, hi: f64) -> f64 {
    let e = |g: f64| g * g + (m as f64 - 2.0) * g;
    e(lo).max(e(hi)).max(0.0)
}

fn check_m(link: &Link, m: usize) -> Result<()> {
    if m < 3 || link.dim() + 1 != m {
        return Err(ConifoldError::InvalidInput(format!(
            "dimension m = {m} does not match link dimension {} (need m = d + 1 >= 3)",
            link.dim()
        )));
    }
    Ok(())
}

/// All exceptional weights of the cone over `link` lying in `[lo, hi]`, sorted by gamma.
pub fn exceptional_weights(link: &Link, m: usize, range: (f64, f64)) -> Result<Vec<ExceptionalWeight>> {
    exceptional_weights_for_end(link, m, range, 0)
}

pub fn exceptional_weights_for_end(
    link: &Link,
    m: usize,
    range: (f64, f64),
    end_index: usize,
) -> Result<Vec<ExceptionalWeight>> {
    check_m(link, m)?;
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(ConifoldError::InvalidInput(format!("bad gamma range [{lo}, {hi}]")));
    }
    let cap = eigenvalue_cap(m, lo, hi);
    if let Some(cov) = link.coverage() {
        if cap > cov {
            return Err(ConifoldError::InvalidInput(format!(
                "range [{lo}, {hi}] needs eigenvalues up to {cap}, spectrum only covers {cov}"
            )));
        }
    }
    let slack = 1e-12;
    let mut out = Vec::new();
    for (e, mult) in link.eigenvalues_below(cap) {
        let (gp, gm) = exceptional_roots(m, e);
        for g in [gm, gp] {
            if g >= lo - slack && g <= hi + slack {
                out.push(ExceptionalWeight { gamma: g, mult, source_eigenvalue: e, end_index });
            }
        }
    }
    out.sort_by(|a, b| a.gamma.total_cmp(&b.gamma));
    Ok(out)
}

pub fn exceptional_set(link: &Link, m: usize, range: (f64, f64), end_index: usize) -> Result<ExceptionalSet> {
    Ok(ExceptionalSet { range, weights: exceptional_weights_for_end(link, m, range, end_index)? })
}

/// Nearest exceptional weight to `beta` within `tol`, if any.
fn near_exceptional(set: &ExceptionalSet, beta: f64, tol: f64) -> Option<f64> {
    set.weights.iter().map(|w| w.gamma).find(|g| (g - beta).abs() <= tol)
}

/// True iff no weight is within `tol` of an exceptional weight of its end.
pub fn is_fredholm(beta: &[f64], exc: &[ExceptionalSet], tol: f64) -> Result<bool> {
    if beta.len() != exc.len() {
        return Err(ConifoldError::InvalidInput(format!(
            "{} weights for {} ends",
            beta.len(),
            exc.len()
        )));
    }
    for (&b, set) in beta.iter().zip(exc) {
        if b < set.range.0 - tol || b > set.range.1 + tol {
            return Err(ConifoldError::RangeTooSmall { lo: set.range.0, hi: set.range.1, beta: b });
        }
    }
    Ok(beta.iter().zip(exc).all(|(&b, set)| near_exceptional(set, b, tol).is_none()))
}

fn reject_exceptional(link: &Link, m: usize, end: usize, beta: f64, tol: f64) -> Result<()> {
    let set = exceptional_set(link, m, (beta - 1.0, beta + 1.0), end)?;
    if let Some(gamma) = near_exceptional(&set, beta, tol) {
        return Err(ConifoldError::ExceptionalWeight { end, beta, gamma, tol });
    }
    Ok(())
}

/// Sum of multiplicities of exceptional weights strictly between `a` and `b`.
fn crossed(link: &Link, m: usize, a: f64, b: f64) -> Result<i64> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    Ok(exceptional_weights(link, m, (lo, hi))?
        .iter()
        .filter(|w| w.gamma > lo && w.gamma < hi)
        .map(|w| w.mult as i64)
        .sum())
}

/// `i(w2) - i(w1)`, requiring `w2` to give the larger space on every end.
pub fn index_change(w1: &[f64], w2: &[f64], ends: &[EndDesc], m: usize, tol: f64) -> Result<i64> {
    if w1.len() != ends.len() || w2.len() != ends.len() {
        return Err(ConifoldError::InvalidInput("weight vectors must have one entry per end".into()));
    }
    let mut total = 0;
    for (j, end) in ends.iter().enumerate() {
        reject_exceptional(&end.link, m, j, w1[j], tol)?;
        reject_exceptional(&end.link, m, j, w2[j], tol)?;
        let ok = match end.kind {
            EndKind::CS => w1[j] >= w2[j],
            EndKind::AC => w1[j] <= w2[j],
        };
        if !ok {
            let detail = match end.kind {
                EndKind::CS => format!("CS end needs beta1 >= beta2, got {} < {}", w1[j], w2[j]),
                EndKind::AC => format!("AC end needs beta1 <= beta2, got {} > {}", w1[j], w2[j]),
            };
            return Err(ConifoldError::OrderingViolated { end: j, detail });
        }
        total += crossed(&end.link, m, w1[j], w2[j])?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConifoldKind {
    Compact,
    AC,
    CS,
    CSAC,
}

/// Facts about the Laplacian between weighted spaces; `None` means unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionFacts {
    pub injective: Option<bool>,
    pub surjective: Option<bool>,
    pub index: Option<i64>,
    pub kernel_dim: Option<i64>,
}

/// Index relative to the region where every weight equals `(2-m)/2`.
fn index_from_anchor(kind: EndKind, link: &Link, m: usize, beta: f64) -> Result<i64> {
    let anchor = (2.0 - m as f64) / 2.0;
    let n = crossed(link, m, anchor, beta)?;
    let grows = match kind {
        EndKind::AC => beta > anchor,
        EndKind::CS => beta < anchor,
    };
    Ok(if grows { n } else { -n })
}

fn cs_injective(beta: &[f64], half: f64) -> bool {
    beta.iter().all(|&b| b > 0.0)
        || (0..beta.len()).any(|j| beta[j] > 0.0 && beta.iter().enumerate().all(|(i, &b)| i == j || b > half))
}

/// Classification of weights into regions where the Laplacian is known to be
/// injective, surjective or an isomorphism, with index and kernel dimension.
///
/// Weight order: one entry per end; for `CSAC` the order is `[mu (CS), lambda (AC)]`.
pub fn classify_weight_region(
    kind: ConifoldKind,
    weights: &[f64],
    link: &Link,
    m: usize,
    tol: f64,
) -> Result<RegionFacts> {
    check_m(link, m)?;
    let two_m = 2.0 - m as f64;
    let half = two_m / 2.0;
    let kinds: Vec<EndKind> = match kind {
        ConifoldKind::Compact => {
            return Ok(RegionFacts { injective: Some(false), surjective: Some(false), index: Some(0), kernel_dim: Some(1) })
        }
        ConifoldKind::AC => vec![EndKind::AC; weights.len()],
        ConifoldKind::CS => vec![EndKind::CS; weights.len()],
        ConifoldKind::CSAC => {
            if weights.len() != 2 {
                return Err(ConifoldError::InvalidInput("CS/AC classification takes [mu, lambda]".into()));
            }
            vec![EndKind::CS, EndKind::AC]
        }
    };
    if weights.is_empty() {
        return Err(ConifoldError::InvalidInput("at least one end weight is required".into()));
    }
    for (j, &b) in weights.iter().enumerate() {
        reject_exceptional(link, m, j, b, tol)?;
    }
    let mut index = 0;
    for (&k, &b) in kinds.iter().zip(weights) {
        index += index_from_anchor(k, link, m, b)?;
    }
    let (injective, surjective) = match kind {
        ConifoldKind::AC => (weights.iter().all(|&b| b < 0.0), weights.iter().all(|&b| b > two_m)),
        ConifoldKind::CS => {
            let dual: Vec<f64> = weights.iter().map(|&b| two_m - b).collect();
            (cs_injective(weights, half), cs_injective(&dual, half))
        }
        ConifoldKind::CSAC => {
            let (mu, lambda) = (weights[0], weights[1]);
            (lambda < 0.0 && mu > two_m, lambda > two_m && mu < 0.0)
        }
        ConifoldKind::Compact => unreachable!(),
    };
    let cs_region_a = kind == ConifoldKind::CS && weights.iter().all(|&b| b > two_m && b < 0.0);
    let mut facts = RegionFacts {
        injective: injective.then_some(true),
        surjective: surjective.then_some(true),
        index: Some(index),
        kernel_dim: None,
    };
    if cs_region_a {
        facts = RegionFacts { injective: Some(false), surjective: Some(false), index: Some(0), kernel_dim: Some(1) };
    } else if injective {
        facts.kernel_dim = Some(0);
    } else if surjective {
        facts.kernel_dim = Some(index);
        facts.injective = Some(index == 0);
    }
    Ok(facts)
}

/// Hölder and Sobolev conjugate exponents; `None` marks an undefined value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateExponents {
    pub p_prime: Option<f64>,
    pub p_star: Option<f64>,
    pub p_star_l: Option<f64>,
}

pub fn conjugate_exponents(p: f64, m: usize, l: usize) -> Result<ConjugateExponents> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(ConifoldError::UndefinedExponent(format!("p = {p} must be a finite number >= 1")));
    }
    let mf = m as f64;
    let sob = |l: f64| (l * p < mf).then(|| mf * p / (mf - l * p));
    Ok(ConjugateExponents {
        p_prime: (p > 1.0).then(|| p / (p - 1.0)),
        p_star: sob(1.0),
        p_star_l: sob(l as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_roots_satisfy_vieta() {
        for m in 3..7 {
            for &e in &[0.0, 1e-8, 2.0, 17.5, 1e6] {
                let (gp, gm) = exceptional_roots(m, e);
                assert!((gp + gm - (2.0 - m as f64)).abs() < 1e-9 * (1.0 + e.sqrt()));
                assert!((gp * gm + e).abs() < 1e-9 * (1.0 + e));
            }
        }
    }

    #[test]
    fn cs_region_a_has_constant_kernel() {
        let s = Link::unit_sphere(2).unwrap();
        let f = classify_weight_region(ConifoldKind::CS, &[-0.5, -0.3], &s, 3, DEFAULT_TOL).unwrap();
        assert_eq!(f.kernel_dim, Some(1));
        assert_eq!(f.index, Some(0));
    }
}
