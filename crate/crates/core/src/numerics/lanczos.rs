//! Lanczos iteration for the largest eigenvalues of an operator that is
//! self-adjoint in a weighted inner product.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Options for [`lanczos_largest`].
#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub nev: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { nev: 2, max_iter: 300, rel_tol: 1e-10, seed: 0x5eed }
    }
}

/// Largest `nev` eigenvalues (descending) of `T`, where `T` is self-adjoint
/// with respect to `<x, y> = x . (M y)`.
///
/// Full reorthogonalisation keeps the basis clean; convergence is declared
/// from the Ritz residual estimates.
pub fn lanczos_largest<FT, FM>(n: usize, apply_t: FT, apply_m: FM, opts: LanczosOptions) -> Vec<f64>
where
    FT: Fn(&[f64]) -> Vec<f64>,
    FM: Fn(&[f64]) -> Vec<f64>,
{
    if n == 0 {
        return Vec::new();
    }
    let max_iter = opts.max_iter.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut mv = apply_m(&v);
    let nrm = dot(&v, &mv).sqrt();
    scale(&mut v, 1.0 / nrm);
    scale(&mut mv, 1.0 / nrm);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut mbasis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last: Vec<f64> = Vec::new();

    for it in 0..max_iter {
        let mut w = apply_t(&v);
        let alpha = dot(&w, &mv);
        axpy(&mut w, -alpha, &v);
        if let (Some(prev), Some(&b)) = (basis.last(), betas.last()) {
            axpy(&mut w, -b, prev);
        }
        basis.push(v.clone());
        mbasis.push(mv.clone());
        alphas.push(alpha);
        for _ in 0..2 {
            for (q, mq) in basis.iter().zip(&mbasis) {
                let c = dot(&w, mq);
                axpy(&mut w, -c, q);
            }
        }
        let mw = apply_m(&w);
        let beta = dot(&w, &mw).max(0.0).sqrt();

        let k = alphas.len();
        let check = k >= opts.nev && (k % 5 == 0 || beta < 1e-300 || it + 1 == max_iter);
        if check {
            let (vals, resid) = ritz(&alphas, &betas, beta);
            let top: Vec<f64> = vals.iter().take(opts.nev).copied().collect();
            let converged = resid
                .iter()
                .take(opts.nev)
                .zip(&top)
                .all(|(r, t)| *r <= opts.rel_tol * t.abs().max(1e-300));
            last = top;
            if converged {
                break;
            }
        }
        let scale_ref = alphas.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if beta <= 1e-14 * scale_ref.max(1e-300) {
            let (vals, _) = ritz(&alphas, &betas, 0.0);
            last = vals.into_iter().take(opts.nev).collect();
            break;
        }
        betas.push(beta);
        v = w;
        mv = mw;
        scale(&mut v, 1.0 / beta);
        scale(&mut mv, 1.0 / beta);
    }
    if last.is_empty() {
        let (vals, _) = ritz(&alphas, &betas, 0.0);
        last = vals.into_iter().take(opts.nev).collect();
    }
    last
}

/// Ritz values (descending) and residual estimates of the Lanczos tridiagonal.
fn ritz(alphas: &[f64], betas: &[f64], beta_next: f64) -> (Vec<f64>, Vec<f64>) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> = (0..k)
        .map(|i| (eig.eigenvalues[i], (beta_next * eig.eigenvectors[(k - 1, i)]).abs()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.into_iter().unzip()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn scale(x: &mut [f64], a: f64) {
    for v in x {
        *v *= a;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_top_generalized_eigenvalues_of_diagonal_pencil() {
        // T = K^{-1} M with K = diag(k), M = diag(m); eigenvalues m_i / k_i.
        let n = 50;
        let k: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let m: Vec<f64> = (0..n).map(|i| 2.0 + (i % 3) as f64).collect();
        let vals = lanczos_largest(
            n,
            |x| x.iter().enumerate().map(|(i, v)| v * m[i] / k[i]).collect(),
            |x| x.iter().enumerate().map(|(i, v)| v * m[i]).collect(),
            LanczosOptions { nev: 2, ..Default::default() },
        );
        let mut exact: Vec<f64> = (0..n).map(|i| m[i] / k[i]).collect();
        exact.sort_by(|a, b| b.total_cmp(a));
        assert!((vals[0] - exact[0]).abs() < 1e-9 * exact[0]);
        assert!((vals[1] - exact[1]).abs() < 1e-9 * exact[1]);
    }
}
