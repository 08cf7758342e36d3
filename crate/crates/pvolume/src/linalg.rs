//! Small dense kernels for the n ≤ 16 systems met in this crate.

use std::ops::{Index, IndexMut};

use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
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
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec shape");
        (0..self.rows)
            .map(|i| (0..self.cols).fold(T::zero(), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Mat<T>,
    perm: Vec<usize>,
    parity: bool,
    singular: bool,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &Mat<T>) -> Self {
        assert_eq!(a.rows, a.cols, "LU of a non-square matrix");
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = false;
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == T::zero() || !best.is_finite() {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
                parity = !parity;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        lu[(i, j)] = lu[(i, j)] - f * lu[(k, j)];
                    }
                }
            }
        }
        Lu { lu, perm, parity, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> T {
        let n = self.lu.rows;
        let mut d = if self.parity { -T::one() } else { T::one() };
        for i in 0..n {
            d = d * self.lu[(i, i)];
        }
        d
    }

    /// Sign of the determinant without forming the product (avoids overflow).
    pub fn det_sign(&self) -> T {
        let n = self.lu.rows;
        let mut s = if self.parity { -T::one() } else { T::one() };
        for i in 0..n {
            let d = self.lu[(i, i)];
            if d == T::zero() {
                return T::zero();
            }
            if d < T::zero() {
                s = -s;
            }
        }
        s
    }

    pub fn solve_vec(&self, b: &[T]) -> Option<Vec<T>> {
        if self.singular {
            return None;
        }
        let n = self.lu.rows;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] = x[i] - self.lu[(i, k)] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] = x[i] - self.lu[(i, k)] * x[k];
            }
            x[i] = x[i] / self.lu[(i, i)];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat<T>> {
        let n = self.lu.rows;
        let mut inv = Mat::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = self.solve_vec(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Some(inv)
    }
}

/// Singular values (descending) by one-sided Jacobi rotations.
pub fn singular_values<T: Real>(a: &Mat<T>) -> Vec<T> {
    let (m, n) = (a.rows, a.cols);
    let mut u = if m >= n { a.clone() } else { a.transpose() };
    let (m, n) = if m >= n { (m, n) } else { (n, m) };
    let eps = T::epsilon();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    alpha = alpha + up * up;
                    beta = beta + uq * uq;
                    gamma = gamma + up * uq;
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = (0..n)
        .map(|j| (0..m).fold(T::zero(), |acc, i| acc + u[(i, j)] * u[(i, j)]).sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// 2-norm condition number; infinite for rank-deficient input.
pub fn condition_number<T: Real>(a: &Mat<T>) -> T {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > T::zero() => hi / lo,
        _ => T::infinity(),
    }
}

/// Householder QR of an m×n matrix (m ≥ n), kept in compact form.
#[derive(Clone, Debug)]
pub struct Qr<T> {
    qr: Mat<T>,
    rdiag: Vec<T>,
}

impl<T: Real> Qr<T> {
    pub fn new(a: &Mat<T>) -> Self {
        let (m, n) = (a.rows, a.cols);
        assert!(m >= n, "QR needs rows >= cols");
        let mut qr = a.clone();
        let mut rdiag = vec![T::zero(); n];
        for k in 0..n {
            let mut nrm = T::zero();
            for i in k..m {
                nrm = nrm.hypot(qr[(i, k)]);
            }
            if nrm != T::zero() {
                if qr[(k, k)] < T::zero() {
                    nrm = -nrm;
                }
                for i in k..m {
                    qr[(i, k)] = qr[(i, k)] / nrm;
                }
                qr[(k, k)] = qr[(k, k)] + T::one();
                for j in k + 1..n {
                    let mut s = T::zero();
                    for i in k..m {
                        s = s + qr[(i, k)] * qr[(i, j)];
                    }
                    s = -s / qr[(k, k)];
                    for i in k..m {
                        qr[(i, j)] = qr[(i, j)] + s * qr[(i, k)];
                    }
                }
            }
            rdiag[k] = -nrm;
        }
        Qr { qr, rdiag }
    }

    pub fn is_full_rank(&self) -> bool {
        self.rdiag.iter().all(|d| *d != T::zero())
    }

    /// Upper-triangular factor R (n×n).
    pub fn r(&self) -> Mat<T> {
        let n = self.qr.cols;
        Mat::from_fn(n, n, |i, j| {
            if i < j {
                self.qr[(i, j)]
            } else if i == j {
                self.rdiag[i]
            } else {
                T::zero()
            }
        })
    }

    /// Thin orthonormal factor Q (m×n).
    pub fn q(&self) -> Mat<T> {
        let (m, n) = (self.qr.rows, self.qr.cols);
        let mut q = Mat::zeros(m, n);
        for k in (0..n).rev() {
            q[(k, k)] = T::one();
            for j in k..n {
                if self.qr[(k, k)] != T::zero() {
                    let mut s = T::zero();
                    for i in k..m {
                        s = s + self.qr[(i, k)] * q[(i, j)];
                    }
                    s = -s / self.qr[(k, k)];
                    for i in k..m {
                        q[(i, j)] = q[(i, j)] + s * self.qr[(i, k)];
                    }
                }
            }
        }
        q
    }

    /// Least-squares solution of A x ≈ b.
    pub fn solve_lstsq(&self, b: &[T]) -> Option<Vec<T>> {
        if !self.is_full_rank() {
            return None;
        }
        let (m, n) = (self.qr.rows, self.qr.cols);
        let mut y = b.to_vec();
        for k in 0..n {
            let mut s = T::zero();
            for i in k..m {
                s = s + self.qr[(i, k)] * y[i];
            }
            s = -s / self.qr[(k, k)];
            for i in k..m {
                y[i] = y[i] + s * self.qr[(i, k)];
            }
        }
        let mut x = vec![T::zero(); n];
        for k in (0..n).rev() {
            let mut s = y[k];
            for j in k + 1..n {
                s = s - self.qr[(k, j)] * x[j];
            }
            x[k] = s / self.rdiag[k];
        }
        Some(x)
    }
}

/// Least squares by Householder QR followed by refinement steps on the residual.
pub fn lstsq_refined<T: Real>(a: &Mat<T>, b: &[T], steps: usize) -> Option<Vec<T>> {
    let qr = Qr::new(a);
    let mut x = qr.solve_lstsq(b)?;
    for _ in 0..steps {
        let ax = a.matvec(&x);
        let r: Vec<T> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
        let dx = qr.solve_lstsq(&r)?;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi = *xi + *di;
        }
    }
    Some(x)
}
