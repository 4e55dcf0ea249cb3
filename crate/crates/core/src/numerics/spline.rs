//! Cubic interpolating splines with clamped or natural ends.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    /// Builds the interpolant. `slopes = Some((s0, sn))` clamps the end
    /// derivatives; `None` gives natural end conditions.
    pub fn new(x: &[f64], y: &[f64], slopes: Option<(f64, f64)>) -> Result<Self, String> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err("a spline needs at least two knots with matching values".into());
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err("spline knots must be strictly increasing".into());
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        match slopes {
            Some((s0, _)) => {
                b[0] = 2.0 * h[0];
                c[0] = h[0];
                d[0] = 6.0 * ((y[1] - y[0]) / h[0] - s0);
            }
            None => b[0] = 1.0,
        }
        for i in 1..n - 1 {
            a[i] = h[i - 1];
            b[i] = 2.0 * (h[i - 1] + h[i]);
            c[i] = h[i];
            d[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        match slopes {
            Some((_, sn)) => {
                a[n - 1] = h[n - 2];
                b[n - 1] = 2.0 * h[n - 2];
                d[n - 1] = 6.0 * (sn - (y[n - 1] - y[n - 2]) / h[n - 2]);
            }
            None => b[n - 1] = 1.0,
        }
        // Thomas algorithm; the system is diagonally dominant.
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = d[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
        }
        Ok(CubicSpline { x: x.to_vec(), y: y.to_vec(), m })
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    fn eval_inside(&self, i: usize, t: f64) -> (f64, f64, f64) {
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (mi, mj) = (self.m[i], self.m[i + 1]);
        let f = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * mi + (b * b * b - b) * mj) * h * h / 6.0;
        let f1 = (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * mi
            + (3.0 * b * b - 1.0) / 6.0 * h * mj;
        let f2 = a * mi + b * mj;
        (f, f1, f2)
    }

    /// Value and first two derivatives; linear continuation outside the knots.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let n = self.x.len();
        if t <= self.x[0] {
            let (f, f1, _) = self.eval_inside(0, self.x[0]);
            return (f + f1 * (t - self.x[0]), f1, 0.0);
        }
        if t >= self.x[n - 1] {
            let (f, f1, _) = self.eval_inside(n - 2, self.x[n - 1]);
            return (f + f1 * (t - self.x[n - 1]), f1, 0.0);
        }
        let i = match self.x.partition_point(|&k| k <= t) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        self.eval_inside(i, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_with_clamped_slopes() {
        let f = |x: f64| 0.5 * x * x * x - x * x + 2.0 * x + 1.0;
        let df = |x: f64| 1.5 * x * x - 2.0 * x + 2.0;
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * 0.4).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let s = CubicSpline::new(&xs, &ys, Some((df(xs[0]), df(xs[8])))).unwrap();
        for &t in &[0.13, 1.01, 2.77, 3.1] {
            let (v, d1, d2) = s.eval(t);
            assert!((v - f(t)).abs() < 1e-10);
            assert!((d1 - df(t)).abs() < 1e-9);
            assert!((d2 - (3.0 * t - 2.0)).abs() < 1e-8);
        }
    }
}
