//! Dense complex least squares by Householder QR with column pivoting.
//!
//! Rank-deficient systems go through a complete orthogonal decomposition so
//! the returned solution is the minimum-norm minimizer.

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Column-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[j * rows + i] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.rows + i]
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    fn column_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (yi, &a) in y.iter_mut().zip(self.column(j)) {
                *yi += a * xj;
            }
        }
        y
    }

    fn conj_transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstsqSolution {
    pub x: Vec<Complex64>,
    pub rank: usize,
}

/// Reflector `H = I - 2 v v^H / |v|^2` with `H x = beta e_1`. Returns `None`
/// when `x` is already zero.
struct Reflector {
    v: Vec<Complex64>,
    scale: f64,
    beta: Complex64,
}

impl Reflector {
    fn new(x: &[Complex64]) -> Option<Self> {
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        let beta = -phase * norm;
        let mut v = x.to_vec();
        v[0] -= beta;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vv == 0.0 {
            return None;
        }
        Some(Self { v, scale: 2.0 / vv, beta })
    }

    fn apply(&self, y: &mut [Complex64]) {
        let dot: Complex64 = self.v.iter().zip(y.iter()).map(|(v, y)| v.conj() * y).sum();
        let s = dot * self.scale;
        for (yi, vi) in y.iter_mut().zip(&self.v) {
            *yi -= vi * s;
        }
    }
}

/// Pivoted QR of `a` in place: on return the upper triangle holds `R`, and
/// `perm[k]` is the original column sitting at position `k`.
struct PivotedQr {
    r: Matrix,
    reflectors: Vec<Option<Reflector>>,
    perm: Vec<usize>,
}

fn column_norm_sqr(col: &[Complex64]) -> f64 {
    col.iter().map(|z| z.norm_sqr()).sum()
}

fn pivoted_qr(mut a: Matrix, pivot: bool) -> PivotedQr {
    let (m, n) = (a.rows, a.cols);
    let steps = m.min(n);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors = Vec::with_capacity(steps);
    for k in 0..steps {
        if pivot {
            // Norms are recomputed rather than downdated; it keeps the pivot
            // order exact at the sizes this crate handles.
            let best = (k..n)
                .map(|j| (j, column_norm_sqr(&a.column(j)[k..])))
                .fold((k, -1.0), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
            if best.0 != k {
                let (lo, hi) = a.data.split_at_mut(best.0 * m);
                lo[k * m..(k + 1) * m].swap_with_slice(&mut hi[..m]);
                perm.swap(k, best.0);
            }
        }
        let h = Reflector::new(&a.column(k)[k..]);
        if let Some(h) = &h {
            let col = a.column_mut(k);
            col[k] = h.beta;
            col[k + 1..].iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for j in k + 1..n {
                h.apply(&mut a.column_mut(j)[k..]);
            }
        }
        reflectors.push(h);
    }
    PivotedQr { r: a, reflectors, perm }
}

impl PivotedQr {
    fn apply_qh(&self, b: &mut [Complex64]) {
        for (k, h) in self.reflectors.iter().enumerate() {
            if let Some(h) = h {
                h.apply(&mut b[k..]);
            }
        }
    }

    fn apply_q(&self, x: &mut [Complex64]) {
        for (k, h) in self.reflectors.iter().enumerate().rev() {
            if let Some(h) = h {
                h.apply(&mut x[k..]);
            }
        }
    }

    fn numerical_rank(&self, rcond: f64) -> usize {
        let steps = self.r.rows.min(self.r.cols);
        let Some(top) = (steps > 0).then(|| self.r.get(0, 0).norm()) else { return 0 };
        if top == 0.0 {
            return 0;
        }
        (0..steps).take_while(|&k| self.r.get(k, k).norm() > rcond * top).count()
    }
}

/// Default relative cutoff for the numerical rank.
pub fn default_rcond(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

/// Minimum-norm minimizer of `|a x - b|_2`. Diagonal entries of `R` below
/// `rcond * |R_00|` are treated as zero.
pub fn solve(a: &Matrix, b: &[Complex64], rcond: f64) -> Result<LstsqSolution> {
    if b.len() != a.rows {
        return Err(invalid(format!("right-hand side has {} entries for {} rows", b.len(), a.rows)));
    }
    let n = a.cols;
    let zero = Complex64::new(0.0, 0.0);
    let qr = pivoted_qr(a.clone(), true);
    let rank = qr.numerical_rank(rcond);
    let mut c = b.to_vec();
    qr.apply_qh(&mut c);

    let mut y = vec![zero; n];
    if rank == n {
        back_substitute_upper(&qr.r, &c[..rank], &mut y[..rank]);
    } else if rank > 0 {
        // [R11 R12] = [L^H 0] Q2^H from a QR of its conjugate transpose.
        let top = Matrix::from_fn(rank, n, |i, j| if j >= i { qr.r.get(i, j) } else { zero });
        let second = pivoted_qr(top.conj_transpose(), false);
        let mut z = vec![zero; n];
        forward_substitute_lower_from_upper(&second.r, &c[..rank], &mut z[..rank]);
        second.apply_q(&mut z);
        y = z;
    }
    let mut x = vec![zero; n];
    for (k, &p) in qr.perm.iter().enumerate() {
        x[p] = y[k];
    }
    Ok(LstsqSolution { x, rank })
}

fn back_substitute_upper(r: &Matrix, c: &[Complex64], y: &mut [Complex64]) {
    for i in (0..c.len()).rev() {
        let mut s = c[i];
        for j in i + 1..c.len() {
            s -= r.get(i, j) * y[j];
        }
        y[i] = s / r.get(i, i);
    }
}

/// Solves `U^H y = c` for upper-triangular `U`.
fn forward_substitute_lower_from_upper(u: &Matrix, c: &[Complex64], y: &mut [Complex64]) {
    for i in 0..c.len() {
        let mut s = c[i];
        for j in 0..i {
            s -= u.get(j, i).conj() * y[j];
        }
        y[i] = s / u.get(i, i).conj();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn square_system() {
        let a = Matrix::from_fn(2, 2, |i, j| [[c(2.0, 0.0), c(1.0, 1.0)], [c(0.0, -1.0), c(3.0, 0.0)]][i][j]);
        let x_true = vec![c(1.0, -2.0), c(0.5, 0.25)];
        let b = a.mul_vec(&x_true);
        let sol = solve(&a, &b, 1e-14).unwrap();
        assert_eq!(sol.rank, 2);
        for (x, t) in sol.x.iter().zip(&x_true) {
            assert!((x - t).norm() < 1e-13);
        }
    }

    #[test]
    fn overdetermined_line_fit() {
        // Fit y = p + q t to exact data.
        let ts = [0.0, 1.0, 2.0, 3.0, 4.0];
        let a = Matrix::from_fn(5, 2, |i, j| if j == 0 { c(1.0, 0.0) } else { c(ts[i], 0.0) });
        let b: Vec<_> = ts.iter().map(|t| c(3.0 - 0.5 * t, 0.0)).collect();
        let sol = solve(&a, &b, 1e-14).unwrap();
        assert!((sol.x[0] - 3.0).norm() < 1e-13);
        assert!((sol.x[1] + 0.5).norm() < 1e-13);
    }

    #[test]
    fn rank_deficient_gives_minimum_norm() {
        // Two identical columns: min-norm splits the weight evenly.
        let a = Matrix::from_fn(3, 2, |i, _| c(1.0 + i as f64, 0.0));
        let b: Vec<_> = (0..3).map(|i| c(2.0 * (1.0 + i as f64), 0.0)).collect();
        let sol = solve(&a, &b, 1e-12).unwrap();
        assert_eq!(sol.rank, 1);
        assert!((sol.x[0] - 1.0).norm() < 1e-12);
        assert!((sol.x[1] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let a = Matrix::zeros(3, 2);
        let sol = solve(&a, &[c(1.0, 0.0); 3], 1e-12).unwrap();
        assert_eq!(sol.rank, 0);
        assert!(sol.x.iter().all(|z| z.norm() == 0.0));
    }
}
