//! Banded matrices and a Givens QR factorisation used by the radial solvers.

/// Row-major band storage: entry `(i, j)` is kept when `i - kl <= j <= i + ku`.
#[derive(Debug, Clone)]
pub struct Banded {
    pub rows: usize,
    pub cols: usize,
    pub kl: usize,
    pub ku: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(rows: usize, cols: usize, kl: usize, ku: usize) -> Self {
        Banded { rows, cols, kl, ku, data: vec![0.0; rows * (kl + ku + 1)] }
    }

    #[inline]
    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.rows || j >= self.cols || j + self.kl < i || j > i + self.ku {
            return None;
        }
        Some(i * self.width() + (j + self.kl - i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to entry `(i, j)`; panics if the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i},{j}) outside band kl={} ku={}", self.kl, self.ku));
        self.data[s] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] = v;
    }

    /// Column range holding possibly nonzero entries of row `i`.
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku + 1).min(self.cols);
        lo..hi
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row_range(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for j in self.row_range(i) {
                out[j] += self.get(i, j) * y[i];
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// Returns `D_r * self * D_c` for diagonal scalings given as vectors.
    pub fn scaled(&self, row_scale: Option<&[f64]>, col_scale: Option<&[f64]>) -> Banded {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in self.row_range(i) {
                let mut v = self.get(i, j);
                if let Some(r) = row_scale {
                    v *= r[i];
                }
                if let Some(c) = col_scale {
                    v *= c[j];
                }
                out.set(i, j, v);
            }
        }
        out
    }

    /// Drops one column; later columns shift left, widening the lower band by one.
    pub fn without_column(&self, col: usize) -> Banded {
        let mut out = Banded::zeros(self.rows, self.cols - 1, self.kl + 1, self.ku);
        for i in 0..self.rows {
            for j in self.row_range(i) {
                if j == col {
                    continue;
                }
                let jj = if j > col { j - 1 } else { j };
                out.add(i, jj, self.get(i, j));
            }
        }
        out
    }
}

/// Givens QR of a banded matrix with at least as many rows as columns.
///
/// Solves least-squares problems `min |B x - y|` and normal equations
/// `B^T B x = y` without forming `B^T B`.
#[derive(Debug, Clone)]
pub struct BandedQr {
    n: usize,
    bw: usize,
    /// Upper-triangular factor, row `j` holds columns `j..=j+bw`.
    r: Vec<f64>,
    rotations: Vec<(usize, usize, f64, f64)>,
    rows: usize,
    /// Number of pivots that had to be regularised.
    pub deficient_pivots: usize,
}

impl BandedQr {
    pub fn new(b: &Banded) -> Self {
        assert!(b.rows >= b.cols, "QR needs rows >= cols");
        let (kl, ku) = (b.kl, b.ku);
        let wq = 2 * kl + ku + 1;
        // Working row i holds columns [i - kl, i + kl + ku].
        let mut w = vec![0.0; b.rows * wq];
        let idx = |i: usize, j: usize| -> usize { i * wq + (j + kl - i) };
        for i in 0..b.rows {
            for j in b.row_range(i) {
                w[idx(i, j)] = b.get(i, j);
            }
        }
        let mut rotations = Vec::with_capacity(b.cols * kl.max(1));
        for j in 0..b.cols {
            let last_col = (j + kl + ku).min(b.cols - 1);
            for i in (j + 1)..=(j + kl).min(b.rows - 1) {
                let bij = w[idx(i, j)];
                if bij == 0.0 {
                    continue;
                }
                let a = w[idx(j, j)];
                let rr = a.hypot(bij);
                let (c, s) = (a / rr, bij / rr);
                for col in j..=last_col {
                    let pj = idx(j, col);
                    let pi = idx(i, col);
                    let (xj, xi) = (w[pj], w[pi]);
                    w[pj] = c * xj + s * xi;
                    w[pi] = -s * xj + c * xi;
                }
                w[idx(i, j)] = 0.0;
                rotations.push((j, i, c, s));
            }
        }
        let bw = kl + ku;
        let n = b.cols;
        let mut r = vec![0.0; n * (bw + 1)];
        let mut max_diag: f64 = 0.0;
        for j in 0..n {
            for k in 0..=bw {
                let col = j + k;
                if col < n {
                    r[j * (bw + 1) + k] = w[idx(j, col)];
                }
            }
            max_diag = max_diag.max(r[j * (bw + 1)].abs());
        }
        let floor = max_diag * 1e-15;
        let mut deficient = 0;
        for j in 0..n {
            let d = &mut r[j * (bw + 1)];
            if d.abs() < floor || *d == 0.0 {
                *d = if *d < 0.0 { -floor } else { floor.max(f64::MIN_POSITIVE) };
                deficient += 1;
            }
        }
        BandedQr { n, bw, r, rotations, rows: b.rows, deficient_pivots: deficient }
    }

    #[inline]
    fn rget(&self, j: usize, col: usize) -> f64 {
        self.r[j * (self.bw + 1) + (col - j)]
    }

    /// Solves `R x = z`.
    pub fn solve_r(&self, z: &[f64]) -> Vec<f64> {
        let mut x = z[..self.n].to_vec();
        for j in (0..self.n).rev() {
            let mut acc = x[j];
            for col in (j + 1)..(j + self.bw + 1).min(self.n) {
                acc -= self.rget(j, col) * x[col];
            }
            x[j] = acc / self.rget(j, j);
        }
        x
    }

    /// Solves `R^T z = y`.
    pub fn solve_rt(&self, y: &[f64]) -> Vec<f64> {
        let mut z = y[..self.n].to_vec();
        for j in 0..self.n {
            let mut acc = z[j];
            for i in j.saturating_sub(self.bw)..j {
                acc -= self.rget(i, j) * z[i];
            }
            z[j] = acc / self.rget(j, j);
        }
        z
    }

    /// Solves `B^T B x = y`.
    pub fn solve_normal(&self, y: &[f64]) -> Vec<f64> {
        self.solve_r(&self.solve_rt(y))
    }

    /// Least-squares solution of `B x = y` (exact solve when `B` is square).
    pub fn solve_least_squares(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut qy = y.to_vec();
        for &(a, b, c, s) in &self.rotations {
            let (ya, yb) = (qy[a], qy[b]);
            qy[a] = c * ya + s * yb;
            qy[b] = -s * ya + c * yb;
        }
        self.solve_r(&qy)
    }
}

/// LDL^T factorisation of a symmetric positive definite tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct SymTridiagLdl {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl SymTridiagLdl {
    /// `diag` has length n, `off` has length n-1 (entries (i, i+1)).
    pub fn new(diag: &[f64], off: &[f64]) -> Option<Self> {
        let n = diag.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            d[i] = diag[i] - if i > 0 { l[i - 1] * l[i - 1] * d[i - 1] } else { 0.0 };
            if d[i] <= 0.0 || !d[i].is_finite() {
                return None;
            }
            if i + 1 < n {
                l[i] = off[i] / d[i];
            }
        }
        Some(SymTridiagLdl { d, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut y = b.to_vec();
        for i in 1..n {
            y[i] -= self.l[i - 1] * y[i - 1];
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            y[i] -= self.l[i] * y[i + 1];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(b: &Banded) -> Vec<Vec<f64>> {
        (0..b.rows).map(|i| (0..b.cols).map(|j| b.get(i, j)).collect()).collect()
    }

    #[test]
    fn qr_solves_square_tridiagonal() {
        let n = 7;
        let mut b = Banded::zeros(n, n, 1, 1);
        for i in 0..n {
            b.set(i, i, 2.0 + i as f64 * 0.1);
            if i > 0 {
                b.set(i, i - 1, -1.0 + 0.05 * i as f64);
            }
            if i + 1 < n {
                b.set(i, i + 1, 0.7);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.3).collect();
        let y = b.matvec(&x_true);
        let qr = BandedQr::new(&b);
        let x = qr.solve_least_squares(&y);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
        let g = b.matvec_t(&y);
        let xn = qr.solve_normal(&g);
        let d = dense(&b);
        // B^T B xn should equal g.
        let bx: Vec<f64> = (0..n).map(|i| (0..n).map(|j| d[i][j] * xn[j]).sum()).collect();
        let btbx = b.matvec_t(&bx);
        for i in 0..n {
            assert!((btbx[i] - g[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn qr_handles_rectangular_band() {
        let mut b = Banded::zeros(6, 5, 2, 1);
        for i in 0..6 {
            for j in b.row_range(i) {
                b.set(i, j, 1.0 + (i * 3 + j) as f64 * 0.37 % 1.3);
            }
        }
        let qr = BandedQr::new(&b);
        let y: Vec<f64> = (0..5).map(|i| i as f64 - 1.5).collect();
        let x = qr.solve_normal(&y);
        let btb_x = b.matvec_t(&b.matvec(&x));
        for i in 0..5 {
            assert!((btb_x[i] - y[i]).abs() < 1e-9, "{} vs {}", btb_x[i], y[i]);
        }
    }

    #[test]
    fn ldl_solves_spd_tridiagonal() {
        let diag = [4.0, 5.0, 6.0, 5.0];
        let off = [1.0, -2.0, 0.5];
        let f = SymTridiagLdl::new(&diag, &off).unwrap();
        let x = f.solve(&[1.0, 2.0, 3.0, 4.0]);
        let ax = [
            diag[0] * x[0] + off[0] * x[1],
            off[0] * x[0] + diag[1] * x[1] + off[1] * x[2],
            off[1] * x[1] + diag[2] * x[2] + off[2] * x[3],
            off[2] * x[2] + diag[3] * x[3],
        ];
        for (i, v) in ax.iter().enumerate() {
            assert!((v - (i as f64 + 1.0)).abs() < 1e-12);
        }
    }
}
