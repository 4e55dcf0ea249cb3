//! Link manifolds described only through their Laplace spectrum.
//!
//! Spheres and flat tori have closed-form spectra; anything else is read from
//! a CSV file of `eigenvalue,multiplicity` rows.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ConifoldError, Result};
use crate::numerics::binomial;

/// Absolute tolerance used when merging numerically equal eigenvalues.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LinkKind {
    /// Round sphere S^d of radius `radius`.
    Sphere { d: usize, radius: f64 },
    /// Flat torus R^d / (L_1 Z x ... x L_d Z).
    FlatTorus { lengths: Vec<f64> },
    /// Spectrum ingested from a file; `einstein` is the Ricci constant if known.
    Custom { source: String, dim: usize, pairs: Vec<(f64, u64)>, einstein: Option<f64> },
}

/// A compact link manifold (cross-section of a cone).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    kind: LinkKind,
}

/// Dimension of the space of degree-`n` spherical harmonics on S^d.
pub fn sphere_multiplicity(n: u64, d: u64) -> u64 {
    let total = binomial(n + d, d) - binomial((n + d).saturating_sub(2), d) * u128::from(n >= 2);
    total as u64
}

fn sphere_volume_unit(d: usize) -> f64 {
    match d {
        0 => 2.0,
        1 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI * sphere_volume_unit(d - 2) / (d as f64 - 1.0),
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(ConifoldError::InvalidLink(format!(
            "link dimension {d} < 2; cones need total dimension m = d + 1 >= 3"
        )));
    }
    Ok(())
}

/// Builds a link of the requested kind after validating its parameters.
pub fn make_link(kind: LinkKind) -> Result<Link> {
    match &kind {
        LinkKind::Sphere { d, radius } => {
            check_dim(*d)?;
            if !(radius.is_finite() && *radius > 0.0) {
                return Err(ConifoldError::InvalidLink(format!("sphere radius {radius} must be positive")));
            }
        }
        LinkKind::FlatTorus { lengths } => {
            check_dim(lengths.len())?;
            if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                return Err(ConifoldError::InvalidLink("torus side lengths must be positive".into()));
            }
        }
        LinkKind::Custom { source, dim, pairs, einstein } => {
            check_dim(*dim)?;
            validate_pairs(pairs).map_err(|reason| ConifoldError::SpectrumFile { path: source.clone(), reason })?;
            if let Some(k) = einstein {
                if !k.is_finite() {
                    return Err(ConifoldError::InvalidLink("Einstein constant must be finite".into()));
                }
            }
        }
    }
    Ok(Link { kind })
}

fn validate_pairs(pairs: &[(f64, u64)]) -> std::result::Result<(), String> {
    let first = pairs.first().ok_or("spectrum is empty")?;
    if first.0.abs() > TIE_TOL {
        return Err(format!("first eigenvalue must be 0, found {}", first.0));
    }
    for (i, &(e, m)) in pairs.iter().enumerate() {
        if !e.is_finite() || e < 0.0 {
            return Err(format!("row {}: eigenvalue {e} must be finite and non-negative", i + 1));
        }
        if m == 0 {
            return Err(format!("row {}: multiplicity must be at least 1", i + 1));
        }
        if i > 0 && e < pairs[i - 1].0 - TIE_TOL {
            return Err(format!("row {}: eigenvalues must be sorted ascending", i + 1));
        }
    }
    Ok(())
}

/// Merges adjacent numerically equal eigenvalues.
fn merge_ties(pairs: &[(f64, u64)]) -> Vec<(f64, u64)> {
    let mut out: Vec<(f64, u64)> = Vec::with_capacity(pairs.len());
    for &(e, m) in pairs {
        match out.last_mut() {
            Some(last) if (e - last.0).abs() <= TIE_TOL => last.1 += m,
            _ => out.push((e, m)),
        }
    }
    out
}

impl Link {
    pub fn sphere(d: usize, radius: f64) -> Result<Link> {
        make_link(LinkKind::Sphere { d, radius })
    }

    /// Unit sphere S^d.
    pub fn unit_sphere(d: usize) -> Result<Link> {
        Link::sphere(d, 1.0)
    }

    pub fn flat_torus(lengths: Vec<f64>) -> Result<Link> {
        make_link(LinkKind::FlatTorus { lengths })
    }

    /// Parses a spectrum from CSV text (`e,mult` rows, optional header, `#` comments).
    pub fn from_csv_str(text: &str, source: &str, dim: usize, einstein: Option<f64>) -> Result<Link> {
        let bad = |reason: String| ConifoldError::SpectrumFile { path: source.to_string(), reason };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut pairs = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            if rec.len() != 2 {
                return Err(bad(format!("record {}: expected 2 fields, found {}", i + 1, rec.len())));
            }
            let e = rec[0].parse::<f64>();
            let m = rec[1].parse::<u64>();
            match (e, m) {
                (Ok(e), Ok(m)) => pairs.push((e, m)),
                _ if i == 0 => continue,
                _ => return Err(bad(format!("record {}: cannot parse '{}','{}'", i + 1, &rec[0], &rec[1]))),
            }
        }
        validate_pairs(&pairs).map_err(bad)?;
        make_link(LinkKind::Custom { source: source.to_string(), dim, pairs: merge_ties(&pairs), einstein })
    }

    pub fn from_csv_path(path: &Path, dim: usize, einstein: Option<f64>) -> Result<Link> {
        let text = std::fs::read_to_string(path).map_err(|e| ConifoldError::SpectrumFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Link::from_csv_str(&text, &path.display().to_string(), dim, einstein)
    }

    /// Parses `sphere:D[:RADIUS]`, `torus:L1,L2,...` or `custom:PATH:DIM[:EINSTEIN]`.
    pub fn parse_spec(spec: &str) -> Result<Link> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| ConifoldError::InvalidLink(format!("bad number '{s}' in '{spec}'")))
        };
        match parts.as_slice() {
            ["sphere", d] => Link::sphere(num(d)? as usize, 1.0),
            ["sphere", d, r] => Link::sphere(num(d)? as usize, num(r)?),
            ["torus", ls] => Link::flat_torus(ls.split(',').map(num).collect::<Result<Vec<_>>>()?),
            ["custom", path, dim] => Link::from_csv_path(Path::new(path), num(dim)? as usize, None),
            ["custom", path, dim, k] => Link::from_csv_path(Path::new(path), num(dim)? as usize, Some(num(k)?)),
            _ => Err(ConifoldError::InvalidLink(format!(
                "unrecognised link '{spec}' (expected sphere:D, torus:L1,..,Ld or custom:PATH:DIM)"
            ))),
        }
    }

    pub fn kind(&self) -> &LinkKind {
        &self.kind
    }

    /// Dimension of the link, i.e. m - 1.
    pub fn dim(&self) -> usize {
        match &self.kind {
            LinkKind::Sphere { d, .. } => *d,
            LinkKind::FlatTorus { lengths } => lengths.len(),
            LinkKind::Custom { dim, .. } => *dim,
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match &self.kind {
            LinkKind::Sphere { d, radius } if *radius == 1.0 => format!("sphere:{d}"),
            LinkKind::Sphere { d, radius } => format!("sphere:{d}:{radius}"),
            LinkKind::FlatTorus { lengths } => {
                format!("torus:{}", lengths.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","))
            }
            LinkKind::Custom { source, .. } => format!("custom:{source}"),
        }
    }

    /// Riemannian volume of the link, when known.
    pub fn volume(&self) -> Option<f64> {
        match &self.kind {
            LinkKind::Sphere { d, radius } => Some(sphere_volume_unit(*d) * radius.powi(*d as i32)),
            LinkKind::FlatTorus { lengths } => Some(lengths.iter().product()),
            LinkKind::Custom { .. } => None,
        }
    }

    /// Einstein constant `k` with `Ric = k g'`, when the link is Einstein.
    pub fn einstein_constant(&self) -> Option<f64> {
        match &self.kind {
            LinkKind::Sphere { d, radius } => Some((*d as f64 - 1.0) / (radius * radius)),
            LinkKind::FlatTorus { .. } => Some(0.0),
            LinkKind::Custom { einstein, .. } => *einstein,
        }
    }

    /// Largest eigenvalue the spectrum is known up to (`None` means unbounded).
    pub fn coverage(&self) -> Option<f64> {
        match &self.kind {
            LinkKind::Custom { pairs, .. } => pairs.last().map(|p| p.0),
            _ => None,
        }
    }

    /// All eigenvalues `e <= lambda` with multiplicities, ascending, ties merged.
    pub fn eigenvalues_below(&self, lambda: f64) -> Vec<(f64, u64)> {
        if !(lambda >= 0.0) {
            return Vec::new();
        }
        let cut = lambda + TIE_TOL * lambda.max(1.0);
        match &self.kind {
            LinkKind::Sphere { d, radius } => {
                let mut out = Vec::new();
                for n in 0u64.. {
                    let e = (n * (n + *d as u64 - 1)) as f64 / (radius * radius);
                    if e > cut {
                        break;
                    }
                    out.push((e, sphere_multiplicity(n, *d as u64)));
                }
                out
            }
            LinkKind::FlatTorus { lengths } => torus_spectrum(lengths, cut),
            LinkKind::Custom { pairs, .. } => pairs.iter().copied().filter(|p| p.0 <= cut).collect(),
        }
    }

    /// Multiplicity of `e` if it is an eigenvalue (relative tolerance `tol`).
    pub fn multiplicity_of(&self, e: f64, tol: f64) -> Option<u64> {
        let window = tol * e.abs().max(1.0);
        self.eigenvalues_below(e + window)
            .into_iter()
            .find(|p| (p.0 - e).abs() <= window)
            .map(|p| p.1)
    }

    /// Degree of the sphere harmonic with eigenvalue `e`, if the link is a sphere.
    pub fn sphere_degree(&self, e: f64) -> Option<u64> {
        if let LinkKind::Sphere { d, radius } = &self.kind {
            let d = *d as f64;
            let x = e * radius * radius;
            let n = ((-(d - 1.0) + ((d - 1.0).powi(2) + 4.0 * x).sqrt()) / 2.0).round();
            let back = n * (n + d - 1.0);
            if (back - x).abs() <= 1e-9 * x.max(1.0) {
                return Some(n as u64);
            }
        }
        None
    }
}

fn torus_spectrum(lengths: &[f64], cut: f64) -> Vec<(f64, u64)> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let bounds: Vec<i64> = lengths.iter().map(|l| (l * cut.sqrt() / two_pi).floor() as i64).collect();
    let equal_sides = lengths.windows(2).all(|w| w[0] == w[1]);
    let mut exact: BTreeMap<i64, u64> = BTreeMap::new();
    let mut floats: Vec<f64> = Vec::new();
    let mut k = bounds.iter().map(|b| -b).collect::<Vec<i64>>();
    loop {
        let e: f64 = k.iter().zip(lengths).map(|(&ki, l)| (two_pi * ki as f64 / l).powi(2)).sum();
        if e <= cut {
            if equal_sides {
                *exact.entry(k.iter().map(|v| v * v).sum()).or_default() += 1;
            } else {
                floats.push(e);
            }
        }
        // Odometer increment over the box.
        let mut j = 0;
        loop {
            if j == k.len() {
                let out = if equal_sides {
                    let c = (two_pi / lengths[0]).powi(2);
                    exact.into_iter().map(|(q, m)| (c * q as f64, m)).collect()
                } else {
                    floats.sort_by(f64::total_cmp);
                    merge_ties(&floats.iter().map(|&e| (e, 1)).collect::<Vec<_>>())
                };
                return out;
            }
            if k[j] < bounds[j] {
                k[j] += 1;
                break;
            }
            k[j] = -bounds[j];
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_square_counts_lattice_points() {
        let t = Link::flat_torus(vec![2.0 * std::f64::consts::PI; 2]).unwrap();
        // Unit lattice: e = |k|^2, counts r_2(q).
        let s = t.eigenvalues_below(5.0);
        let expect = vec![(0.0, 1), (1.0, 4), (2.0, 4), (4.0, 4), (5.0, 8)];
        assert_eq!(s.len(), expect.len());
        for (a, b) in s.iter().zip(&expect) {
            assert!((a.0 - b.0).abs() < 1e-12 && a.1 == b.1);
        }
    }

    #[test]
    fn sphere_degree_inverts_eigenvalue() {
        let s = Link::unit_sphere(3).unwrap();
        assert_eq!(s.sphere_degree(8.0), Some(2));
        assert_eq!(s.sphere_degree(7.0), None);
    }

    #[test]
    fn sphere_volume() {
        let s = Link::unit_sphere(2).unwrap();
        assert!((s.volume().unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-14);
        let s3 = Link::unit_sphere(3).unwrap();
        assert!((s3.volume().unwrap() - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-13);
    }
}
