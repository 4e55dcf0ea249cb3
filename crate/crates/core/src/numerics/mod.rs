//! Small numerical building blocks: band solvers, Lanczos, splines,
//! smooth transition functions and line fits.

pub mod banded;
pub mod lanczos;
pub mod spline;

pub use banded::{Banded, BandedQr, SymTridiagLdl};
pub use lanczos::{lanczos_largest, LanczosOptions};
pub use spline::CubicSpline;

/// Quintic smoothstep on [0, 1] (C² with flat ends): value, first and second derivative.
pub fn smoothstep5(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let s2 = s * s;
    let v = s2 * s * (10.0 - 15.0 * s + 6.0 * s2);
    let d1 = 30.0 * s2 * (1.0 - s) * (1.0 - s);
    let d2 = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
    (v, d1, d2)
}

/// `exp(-1/s)` and its first two derivatives, zero for `s <= 0`.
fn psi(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let e = (-1.0 / s).exp();
    let s2 = s * s;
    (e, e / s2, e * (1.0 / (s2 * s2) - 2.0 / (s2 * s)))
}

/// C^∞ monotone step: 0 for `s <= 0`, 1 for `s >= 1`; value and two derivatives.
pub fn smoothstep_inf(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (a, a1, a2) = psi(s);
    let (b0, b1, b2) = psi(1.0 - s);
    // d/ds psi(1-s) = -psi'(1-s), second derivative +psi''(1-s).
    let (b, bd1, bd2) = (b0, -b1, b2);
    let sum = a + b;
    let v = a / sum;
    let num = a1 * b - a * bd1;
    let den = sum * sum;
    let d1 = num / den;
    let num1 = a2 * b - a * bd2;
    let den1 = 2.0 * sum * (a1 + bd1);
    let d2 = (num1 * den - num * den1) / (den * den);
    (v, d1, d2)
}

/// Least-squares line `y = slope * x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    (slope, my - slope * mx)
}

/// Exact integer binomial coefficient.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivatives(f: fn(f64) -> (f64, f64, f64)) {
        let h = 1e-5;
        for &s in &[0.1, 0.33, 0.5, 0.71, 0.93] {
            let (_, d1, d2) = f(s);
            let fd1 = (f(s + h).0 - f(s - h).0) / (2.0 * h);
            let fd2 = (f(s + h).1 - f(s - h).1) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-6 * (1.0 + d1.abs()), "d1 at {s}");
            assert!((d2 - fd2).abs() < 1e-5 * (1.0 + d2.abs()), "d2 at {s}");
        }
    }

    #[test]
    fn smoothsteps_have_consistent_derivatives() {
        check_derivatives(smoothstep5);
        check_derivatives(smoothstep_inf);
        assert_eq!(smoothstep_inf(0.5).0, 0.5);
    }

    #[test]
    fn line_fit_recovers_slope() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| -0.5 * v + 2.0).collect();
        let (s, c) = fit_line(&x, &y);
        assert!((s + 0.5).abs() < 1e-14 && (c - 2.0).abs() < 1e-14);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(40, 20), 137846528820);
    }
}
