//! Sampled link eigenfunctions for pointwise norm evaluation.
//!
//! Every eigenfunction is represented by one fixed representative: a zonal
//! harmonic on spheres and `cos` along the first axis on flat tori. Each
//! sample carries the value, the single non-zero gradient component `g` along
//! a unit direction `E`, the Hessian component `h_EE` and the common value
//! `h_perp` of the Hessian on the orthogonal complement of `E`.

use std::f64::consts::PI;

use crate::error::{ConifoldError, Result};
use crate::link_spectra::{Link, LinkKind};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkJet {
    pub val: f64,
    pub g: f64,
    pub h_ee: f64,
    pub h_perp: f64,
}

/// Quadrature on the link plus sampled jets of one eigenfunction per eigenvalue.
#[derive(Debug, Clone)]
pub struct AngularSamples {
    pub weights: Vec<f64>,
    /// `jets[mode][sample]`.
    pub jets: Vec<Vec<LinkJet>>,
}

/// Number of angular samples for non-constant functions.
pub const ANGULAR_SAMPLES: usize = 96;

/// Gegenbauer `C_n^lambda(x)`.
fn gegenbauer(n: usize, lambda: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut c0 = 1.0;
    let mut c1 = 2.0 * lambda * x;
    for k in 2..=n {
        let kf = k as f64;
        let c2 = (2.0 * x * (kf + lambda - 1.0) * c1 - (kf + 2.0 * lambda - 2.0) * c0) / kf;
        c0 = c1;
        c1 = c2;
    }
    c1
}

fn zonal_jets(n: usize, d: usize, a: f64, thetas: &[f64]) -> Vec<LinkJet> {
    let lam = (d as f64 - 1.0) / 2.0;
    thetas
        .iter()
        .map(|&th| {
            let (s, c) = th.sin_cos();
            let p = gegenbauer(n, lam, c);
            let dp = if n >= 1 { 2.0 * lam * gegenbauer(n - 1, lam + 1.0, c) } else { 0.0 };
            let ddp = if n >= 2 { 4.0 * lam * (lam + 1.0) * gegenbauer(n - 2, lam + 2.0, c) } else { 0.0 };
            LinkJet { val: p, g: -s * dp / a, h_ee: (s * s * ddp - c * dp) / (a * a), h_perp: -c * dp / (a * a) }
        })
        .collect()
}

fn normalise(jets: &mut [LinkJet], weights: &[f64]) {
    let n2: f64 = jets.iter().zip(weights).map(|(j, w)| w * j.val * j.val).sum();
    let s = 1.0 / n2.sqrt();
    for j in jets {
        j.val *= s;
        j.g *= s;
        j.h_ee *= s;
        j.h_perp *= s;
    }
}

impl AngularSamples {
    /// Samples for the eigenvalues `es` (each must lie in the link spectrum).
    pub fn new(link: &Link, es: &[f64], samples: usize) -> Result<AngularSamples> {
        let vol = link.volume();
        if es.iter().all(|&e| e == 0.0) {
            let vol = vol.ok_or_else(|| {
                ConifoldError::Unsupported(format!("pointwise norms need the volume of {}", link.label()))
            })?;
            let c = 1.0 / vol.sqrt();
            return Ok(AngularSamples {
                weights: vec![vol],
                jets: es.iter().map(|_| vec![LinkJet { val: c, ..Default::default() }]).collect(),
            });
        }
        let k = samples.max(8);
        match link.kind() {
            LinkKind::Sphere { d, radius } => {
                let (d, a) = (*d, *radius);
                let thetas: Vec<f64> = (0..k).map(|i| (i as f64 + 0.5) * PI / k as f64).collect();
                let raw: Vec<f64> = thetas.iter().map(|th| th.sin().powi(d as i32 - 1)).collect();
                let total: f64 = raw.iter().sum();
                let vol = vol.unwrap_or(0.0);
                let weights: Vec<f64> = raw.iter().map(|w| w * vol / total).collect();
                let mut jets = Vec::with_capacity(es.len());
                for &e in es {
                    let n = link.sphere_degree(e).ok_or_else(|| {
                        ConifoldError::InvalidInput(format!("{e} is not an eigenvalue of {}", link.label()))
                    })?;
                    let mut j = zonal_jets(n as usize, d, a, &thetas);
                    normalise(&mut j, &weights);
                    jets.push(j);
                }
                Ok(AngularSamples { weights, jets })
            }
            LinkKind::FlatTorus { lengths } => {
                let l1 = lengths[0];
                let vol: f64 = lengths.iter().product();
                let weights = vec![vol / k as f64; k];
                let mut jets = Vec::with_capacity(es.len());
                for &e in es {
                    let w = e.sqrt();
                    let j = (w * l1 / (2.0 * PI)).round();
                    if (2.0 * PI * j / l1 - w).abs() > 1e-9 * w.max(1.0) {
                        return Err(ConifoldError::Unsupported(format!(
                            "torus eigenvalue {e} has no representative along the first axis"
                        )));
                    }
                    let mut js: Vec<LinkJet> = (0..k)
                        .map(|i| {
                            let y = (i as f64 + 0.5) * l1 / k as f64;
                            let (s, c) = (w * y).sin_cos();
                            LinkJet { val: c, g: -w * s, h_ee: -e * c, h_perp: 0.0 }
                        })
                        .collect();
                    normalise(&mut js, &weights);
                    jets.push(js);
                }
                Ok(AngularSamples { weights, jets })
            }
            LinkKind::Custom { .. } => Err(ConifoldError::Unsupported(format!(
                "pointwise norms of non-constant modes need explicit eigenfunctions; {} has none",
                link.label()
            ))),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zonal_harmonics_are_eigenfunctions() {
        for d in [2usize, 3] {
            let link = Link::unit_sphere(d).unwrap();
            for n in 0..4usize {
                let e = (n * (n + d - 1)) as f64;
                let s = AngularSamples::new(&link, &[e], 64).unwrap();
                for j in &s.jets[0] {
                    let lap = j.h_ee + (d as f64 - 1.0) * j.h_perp;
                    assert!((lap + e * j.val).abs() < 1e-9 * (1.0 + e), "d={d} n={n}");
                }
            }
        }
    }
}
