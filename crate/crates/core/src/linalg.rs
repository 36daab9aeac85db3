//! Dense linear algebra for the FEM oracle: profile-aware Cholesky and LU,
//! Householder tridiagonalisation with Sturm bisection, cyclic Jacobi, and a
//! shift-inverted generalised symmetric eigensolver.
//!
//! Matrices are row-major. Factorisations skip structural zeros, so banded
//! operands cost roughly `O(n b^2)` even though storage is dense.

use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is singular at pivot {0}")]
    Singular(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("eigen iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[T]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_fn(rows.len(), cols, |i, j| rows[i][j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Sub-matrix on the given row and column index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .filter(|(a, _)| **a != T::zero())
                    .map(|(a, b)| *a * *b)
                    .sum()
            })
            .collect()
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let src = other.row(k);
                for (o, b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * *b;
                }
            }
        }
        out
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        x.iter().zip(self.mul_vec(y)).map(|(a, b)| *a * b).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `max |a_ij - a_ji| / max |a_ij|`.
    pub fn symmetry_residual(&self) -> T {
        let scale = self.max_abs();
        if scale == T::zero() {
            return T::zero();
        }
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }

    pub fn symmetrize(&mut self) {
        let half = T::lit(0.5);
        for i in 0..self.rows {
            for j in 0..i {
                let avg = (self[(i, j)] + self[(j, i)]) * half;
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    /// Iterator over `(row, col, value)` of the non-zero entries.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(move |(k, v)| (k / self.cols, k % self.cols, *v))
    }

    fn first_nonzero_in_row(&self, i: usize) -> usize {
        self.row(i)
            .iter()
            .position(|v| *v != T::zero())
            .unwrap_or(i)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// `A = L L^T` for symmetric positive definite `A`, exploiting its row profile.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: Matrix<T>,
    /// First structurally non-zero column of each row of `L`.
    start: Vec<usize>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self, LinalgError> {
        let n = a.rows();
        if a.cols() != n {
            return Err(LinalgError::Dimension(format!(
                "{}x{} is not square",
                n,
                a.cols()
            )));
        }
        let start: Vec<usize> = (0..n).map(|i| a.first_nonzero_in_row(i).min(i)).collect();
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in start[i]..=i {
                let k0 = start[i].max(start[j]);
                let mut sum = a[(i, j)];
                let (ri, rj) = (l.row(i), l.row(j));
                for k in k0..j {
                    sum -= ri[k] * rj[k];
                }
                if i == j {
                    if !(sum > T::zero()) {
                        return Err(LinalgError::NotPositiveDefinite {
                            pivot: i,
                            value: sum.as_f64(),
                        });
                    }
                    l[(i, i)] = sum.sqrt();
                } else {
                    l[(i, j)] = sum / l[(j, j)];
                }
            }
        }
        Ok(Cholesky { l, start })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn factor(&self) -> &Matrix<T> {
        &self.l
    }

    /// Overwrites `b` with `L^{-1} b`.
    pub fn solve_lower(&self, b: &mut [T]) {
        let first = b.iter().position(|v| *v != T::zero()).unwrap_or(b.len());
        for i in first..b.len() {
            let row = self.l.row(i);
            let mut sum = b[i];
            for k in self.start[i].max(first)..i {
                sum -= row[k] * b[k];
            }
            b[i] = sum / row[i];
        }
    }

    /// Overwrites `b` with `L^{-T} b`.
    pub fn solve_upper(&self, b: &mut [T]) {
        for i in (0..b.len()).rev() {
            let row = self.l.row(i);
            b[i] /= row[i];
            let xi = b[i];
            if xi == T::zero() {
                continue;
            }
            for k in self.start[i]..i {
                b[k] -= row[k] * xi;
            }
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_lower(&mut x);
        self.solve_upper(&mut x);
        x
    }

    /// `L^{-1} B L^{-T}` for symmetric `B`.
    pub fn congruence(&self, b: &Matrix<T>) -> Matrix<T> {
        let n = self.dim();
        // rows of x are columns of L^{-1} B
        let mut x = Matrix::zeros(n, n);
        for j in 0..n {
            let mut col = b.column(j);
            self.solve_lower(&mut col);
            x.row_mut(j).copy_from_slice(&col);
        }
        // B L^{-T} = (L^{-1} B)^T, so column j of the result is L^{-1} times row j of L^{-1} B
        let x = x.transpose();
        let mut out = Matrix::zeros(n, n);
        for j in 0..n {
            let mut col = x.row(j).to_vec();
            self.solve_lower(&mut col);
            out.row_mut(j).copy_from_slice(&col);
        }
        out.symmetrize();
        out
    }
}

/// `P A = L U` with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    lower_start: Vec<usize>,
    upper_end: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self, LinalgError> {
        let n = a.rows();
        if a.cols() != n {
            return Err(LinalgError::Dimension(format!(
                "{}x{} is not square",
                n,
                a.cols()
            )));
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut end: Vec<usize> = (0..n)
            .map(|i| {
                lu.row(i)
                    .iter()
                    .rposition(|v| *v != T::zero())
                    .map_or(i + 1, |p| p + 1)
            })
            .collect();
        // per-column scale: the coupled blocks differ by many orders of magnitude
        let col_scale: Vec<T> = (0..n)
            .map(|j| (0..n).fold(T::zero(), |m, i| m.max(a[(i, j)].abs())))
            .collect();
        for k in 0..n {
            let mut pivot = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    pivot = i;
                }
            }
            if best <= col_scale[k] * T::epsilon() * T::lit(1e-3) || best == T::zero() {
                return Err(LinalgError::Singular(k));
            }
            if pivot != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot, j)];
                    lu[(pivot, j)] = tmp;
                }
                perm.swap(k, pivot);
                end.swap(k, pivot);
            }
            let pivot_val = lu[(k, k)];
            let pivot_end = end[k];
            for i in k + 1..n {
                let lik = lu[(i, k)];
                if lik == T::zero() {
                    continue;
                }
                let factor = lik / pivot_val;
                lu[(i, k)] = factor;
                for j in k + 1..pivot_end {
                    let ukj = lu[(k, j)];
                    lu[(i, j)] -= factor * ukj;
                }
                end[i] = end[i].max(pivot_end);
            }
        }
        let lower_start = (0..n).map(|i| lu.first_nonzero_in_row(i).min(i)).collect();
        Ok(Lu {
            lu,
            perm,
            lower_start,
            upper_end: end,
        })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.rows();
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut sum = x[i];
            for k in self.lower_start[i]..i {
                sum -= row[k] * x[k];
            }
            x[i] = sum;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut sum = x[i];
            for k in i + 1..self.upper_end[i] {
                sum -= row[k] * x[k];
            }
            x[i] = sum / row[i];
        }
        x
    }
}

/// Eigenpairs with eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct EigenPairs<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

/// Full eigen-decomposition of a small symmetric matrix by cyclic Jacobi,
/// eigenvalues ascending.
pub fn jacobi_eigen<T: Scalar>(a: &Matrix<T>) -> Result<EigenPairs<T>, LinalgError> {
    let n = a.rows();
    let mut a = a.clone();
    let mut v = Matrix::identity(n);
    let max_sweeps = 100;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let diag: T = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off <= diag * T::epsilon() * T::epsilon() || off == T::zero() {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence(max_sweeps));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    Ok(EigenPairs {
        values: order.iter().map(|&i| a[(i, i)]).collect(),
        vectors: Matrix::from_fn(n, n, |r, c| v[(r, order[c])]),
    })
}

/// Householder reduction `Q^T A Q = T` of a symmetric matrix.
struct Tridiagonal<T> {
    diag: Vec<T>,
    off: Vec<T>,
    /// Reflector `k` acts on indices `k+1..n` as `I - tau v v^T`.
    reflectors: Vec<(T, Vec<T>)>,
}

fn tridiagonalize<T: Scalar>(a: &Matrix<T>) -> Tridiagonal<T> {
    let n = a.rows();
    let mut a = a.clone();
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut off = vec![T::zero(); n.saturating_sub(1)];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let x: Vec<T> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let norm = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if m == 1 || norm == T::zero() || x[1..].iter().all(|v| *v == T::zero()) {
            off[k] = x[0];
            reflectors.push((T::zero(), Vec::new()));
            continue;
        }
        let alpha = if x[0] > T::zero() { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: T = v.iter().map(|t| *t * *t).sum();
        let tau = T::lit(2.0) / vnorm2;
        off[k] = alpha;

        // p = tau A22 v, w = p - (tau/2)(p.v) v, A22 -= v w^T + w v^T
        let mut p = vec![T::zero(); m];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &a.row(k + 1 + i)[k + 1..];
            *pi = tau * row.iter().zip(&v).map(|(r, s)| *r * *s).sum::<T>();
        }
        let pv: T = p.iter().zip(&v).map(|(x, y)| *x * *y).sum();
        let half = T::lit(0.5) * tau * pv;
        let w: Vec<T> = p.iter().zip(&v).map(|(pi, vi)| *pi - half * *vi).collect();
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a.row_mut(k + 1 + i)[k + 1..];
            for j in 0..m {
                row[j] -= vi * w[j] + wi * v[j];
            }
        }
        reflectors.push((tau, v));
    }
    Tridiagonal {
        diag: (0..n).map(|i| a[(i, i)]).collect(),
        off,
        reflectors,
    }
}

impl<T: Scalar> Tridiagonal<T> {
    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    fn count_below(&self, x: T) -> usize {
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut q = T::one();
        for i in 0..self.diag.len() {
            let e2 = if i == 0 {
                T::zero()
            } else {
                self.off[i - 1] * self.off[i - 1]
            };
            q = self.diag[i] - x - if i == 0 { T::zero() } else { e2 / q };
            if q == T::zero() {
                q = -tiny;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (T, T) {
        let n = self.diag.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let r = if i > 0 {
                self.off[i - 1].abs()
            } else {
                T::zero()
            } + if i + 1 < n {
                self.off[i].abs()
            } else {
                T::zero()
            };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Eigenvalue of rank `index` (0 = smallest) by bisection.
    fn eigenvalue(&self, index: usize) -> T {
        let (mut lo, mut hi) = self.gershgorin();
        let pad = (hi - lo).max(hi.abs().max(lo.abs())) * T::epsilon();
        lo -= pad;
        hi += pad;
        for _ in 0..4096 {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo + hi) * T::lit(0.5)
    }

    /// Eigenvector of the tridiagonal matrix by inverse iteration at `lambda`.
    fn inverse_iteration(&self, lambda: T, seed: usize, previous: &[(T, Vec<T>)]) -> Vec<T> {
        let n = self.diag.len();
        let norm_t = self
            .diag
            .iter()
            .chain(&self.off)
            .fold(T::zero(), |m, v| m.max(v.abs()));
        let eps_shift = norm_t * T::epsilon();
        let mut x: Vec<T> = (0..n)
            .map(|i| {
                let t = ((i * 7919 + seed * 104_729) % 1013) as f64 / 1013.0;
                T::lit(0.5 + t)
            })
            .collect();
        for _ in 0..3 {
            x = self.solve_shifted(lambda, &x, eps_shift);
            for (mu, v) in previous {
                if (*mu - lambda).abs() <= norm_t * T::lit(1e-6) {
                    let d: T = x.iter().zip(v).map(|(a, b)| *a * *b).sum();
                    for (xi, vi) in x.iter_mut().zip(v) {
                        *xi -= d * *vi;
                    }
                }
            }
            let nrm = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
            for v in &mut x {
                *v /= nrm;
            }
        }
        x
    }

    /// Solves `(T - lambda I) y = b` by Gaussian elimination with partial pivoting.
    fn solve_shifted(&self, lambda: T, b: &[T], tiny: T) -> Vec<T> {
        let n = self.diag.len();
        // rows hold [sub, diag, sup, sup2] after pivoting
        let mut d: Vec<T> = self.diag.iter().map(|v| *v - lambda).collect();
        let mut du: Vec<T> = self.off.clone();
        du.push(T::zero());
        let mut du2 = vec![T::zero(); n];
        let mut dl: Vec<T> = self.off.clone();
        let mut rhs = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == T::zero() {
                    d[i] = tiny;
                }
                let f = dl[i] / d[i];
                d[i + 1] -= f * du[i];
                rhs[i + 1] = rhs[i + 1] - f * rhs[i];
                dl[i] = f;
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                let tmp = d[i + 1];
                d[i + 1] = du[i] - f * tmp;
                du[i] = tmp;
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du2[i];
                }
                rhs.swap(i, i + 1);
                rhs[i + 1] = rhs[i + 1] - f * rhs[i];
                dl[i] = f;
            }
        }
        if d[n - 1] == T::zero() {
            d[n - 1] = tiny;
        }
        let mut y = rhs;
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= du[i] * y[i + 1];
            }
            if i + 2 < n {
                s -= du2[i] * y[i + 2];
            }
            let piv = if d[i] == T::zero() { tiny } else { d[i] };
            y[i] = s / piv;
        }
        y
    }

    /// Applies `Q` to a vector of the tridiagonal basis.
    fn back_transform(&self, y: &mut [T]) {
        for (k, (tau, v)) in self.reflectors.iter().enumerate().rev() {
            if v.is_empty() {
                continue;
            }
            let seg = &mut y[k + 1..];
            let d: T = seg.iter().zip(v).map(|(a, b)| *a * *b).sum();
            let f = *tau * d;
            for (s, vi) in seg.iter_mut().zip(v) {
                *s -= f * *vi;
            }
        }
    }
}

/// The `k` largest eigenpairs of a symmetric matrix, in descending order.
pub fn symmetric_largest<T: Scalar>(a: &Matrix<T>, k: usize) -> Result<EigenPairs<T>, LinalgError> {
    let n = a.rows();
    if a.cols() != n {
        return Err(LinalgError::Dimension(
            "eigenproblem needs a square matrix".into(),
        ));
    }
    let k = k.min(n);
    if n <= 48 {
        let full = jacobi_eigen(a)?;
        let cols: Vec<usize> = (0..k).map(|i| n - 1 - i).collect();
        let rows: Vec<usize> = (0..n).collect();
        return Ok(EigenPairs {
            values: cols.iter().map(|&c| full.values[c]).collect(),
            vectors: full.vectors.select(&rows, &cols),
        });
    }
    let tri = tridiagonalize(a);
    let mut values = Vec::with_capacity(k);
    let mut found: Vec<(T, Vec<T>)> = Vec::with_capacity(k);
    for i in 0..k {
        let lambda = tri.eigenvalue(n - 1 - i);
        let y = tri.inverse_iteration(lambda, i, &found);
        values.push(lambda);
        found.push((lambda, y));
    }
    let mut vectors = Matrix::zeros(n, k);
    for (c, (_, y)) in found.into_iter().enumerate() {
        let mut y = y;
        tri.back_transform(&mut y);
        for r in 0..n {
            vectors[(r, c)] = y[r];
        }
    }
    Ok(EigenPairs { values, vectors })
}

/// Lowest `k` eigenpairs of `K x = lambda M x` with `K` positive definite and
/// `M` positive semi-definite.
///
/// Solved in inverted form `L^{-1} M L^{-T} y = (1/lambda) y` with `K = L L^T`,
/// so the lowest modes carry error relative to themselves rather than to the
/// top of the spectrum. Eigenvalues ascending; vectors `M`-orthonormal columns.
pub fn generalized_lowest<T: Scalar>(
    stiffness: &Matrix<T>,
    mass: &Matrix<T>,
    k: usize,
) -> Result<EigenPairs<T>, LinalgError> {
    let n = stiffness.rows();
    if mass.rows() != n || mass.cols() != n {
        return Err(LinalgError::Dimension(
            "stiffness and mass differ in size".into(),
        ));
    }
    let chol = Cholesky::new(stiffness)?;
    let b = chol.congruence(mass);
    let top = symmetric_largest(&b, k)?;
    let mut values = Vec::with_capacity(top.values.len());
    let mut vectors = Matrix::zeros(n, top.values.len());
    for (c, mu) in top.values.iter().enumerate() {
        if !(*mu > T::zero()) {
            return Err(LinalgError::NotPositiveDefinite {
                pivot: c,
                value: mu.as_f64(),
            });
        }
        let mut x = top.vectors.column(c);
        chol.solve_upper(&mut x);
        let m_norm = mass.bilinear(&x, &x).sqrt();
        for r in 0..n {
            vectors[(r, c)] = x[r] / m_norm;
        }
        values.push(T::one() / *mu);
    }
    Ok(EigenPairs { values, vectors })
}

/// `A - B D^{-1} C` for a symmetric negative- or positive-definite `D`.
pub fn schur_complement<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    c: &Matrix<T>,
    d: &Matrix<T>,
) -> Result<(Matrix<T>, Matrix<T>), LinalgError> {
    // returns the complement and the recovery operator R = -D^{-1} C
    let nd = d.rows();
    let negative = (0..nd).all(|i| d[(i, i)] < T::zero());
    let sign = if negative { -T::one() } else { T::one() };
    let d_signed = Matrix::from_fn(nd, nd, |i, j| sign * d[(i, j)]);
    let chol = Cholesky::new(&d_signed)?;
    let mut recovery = Matrix::zeros(nd, c.cols());
    for j in 0..c.cols() {
        let x = chol.solve(&c.column(j));
        for i in 0..nd {
            recovery[(i, j)] = -sign * x[i];
        }
    }
    let correction = b.matmul(&recovery);
    let mut out = a.clone();
    for i in 0..out.rows() {
        for (o, c) in out.row_mut(i).iter_mut().zip(correction.row(i)) {
            *o += *c;
        }
    }
    Ok((out, recovery))
}
