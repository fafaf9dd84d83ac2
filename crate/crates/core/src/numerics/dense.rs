//! Small dense real matrices: products, Cholesky, and symmetric eigenvalues.
//!
//! Sized for the semidefinite subproblems (order ≤ a few hundred); everything
//! is row-major and allocation-per-result.

use std::ops::{Index, IndexMut};

use crate::scalar::Real;

/// Square real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> RealMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_row_major(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n, "row-major data must hold n² entries");
        Self { n, data }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    /// Frobenius inner product `⟨A, B⟩ = Σ A_ij B_ij`.
    pub fn inner(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == T::zero() {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    /// `self + s·other`
    pub fn add_scaled(&self, s: T, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + s * b).collect(),
        }
    }

    pub fn axpy_in_place(&mut self, s: T, other: &Self) {
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn symmetrized(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.n, |i, j| half * (self[(i, j)] + self[(j, i)]))
    }

    pub fn cholesky(&self) -> Option<Cholesky<T>> {
        Cholesky::new(self)
    }

    /// Eigenvalues of a symmetric matrix in ascending order.
    pub fn symmetric_eigenvalues(&self) -> Vec<T> {
        Tridiagonal::reduce(self).eigenvalues()
    }

    /// Smallest eigenvalue of a symmetric matrix.
    pub fn min_eigenvalue(&self) -> T {
        Tridiagonal::reduce(self).kth_eigenvalue(0)
    }
}

impl<T> Index<(usize, usize)> for RealMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for RealMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Lower Cholesky factor `A = L·Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: RealMatrix<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn new(a: &RealMatrix<T>) -> Option<Self> {
        let n = a.order();
        let mut l = RealMatrix::zeros(n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return None;
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Some(Self { l })
    }

    pub fn factor(&self) -> &RealMatrix<T> {
        &self.l
    }

    /// `L⁻¹` (lower triangular).
    pub fn inverse_factor(&self) -> RealMatrix<T> {
        let n = self.l.order();
        let mut inv = RealMatrix::zeros(n);
        for j in 0..n {
            inv[(j, j)] = self.l[(j, j)].recip();
            for i in j + 1..n {
                let mut s = T::zero();
                for k in j..i {
                    s += self.l[(i, k)] * inv[(k, j)];
                }
                inv[(i, j)] = -s / self.l[(i, i)];
            }
        }
        inv
    }

    /// `A⁻¹ = L⁻ᵀ·L⁻¹`.
    pub fn inverse(&self) -> RealMatrix<T> {
        let li = self.inverse_factor();
        let n = li.order();
        let mut out = RealMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = T::zero();
                for k in i..n {
                    s += li[(k, i)] * li[(k, j)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.l.order();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    pub fn log_det(&self) -> T {
        let two = T::lit(2.0);
        (0..self.l.order()).map(|i| two * self.l[(i, i)].ln()).sum()
    }
}

/// Symmetric tridiagonal form produced by Householder reduction.
#[derive(Debug, Clone)]
pub struct Tridiagonal<T> {
    diag: Vec<T>,
    off: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    /// Householder reduction of a symmetric matrix (eigenvalues preserved).
    pub fn reduce(a: &RealMatrix<T>) -> Self {
        let n = a.order();
        let mut m = a.clone();
        let mut diag = vec![T::zero(); n];
        let mut off = vec![T::zero(); n.saturating_sub(1)];
        let two = T::lit(2.0);
        for k in 0..n.saturating_sub(2) {
            let len = n - k - 1;
            let mut v: Vec<T> = (0..len).map(|i| m[(k + 1 + i, k)]).collect();
            let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
            diag[k] = m[(k, k)];
            if norm == T::zero() {
                off[k] = T::zero();
                continue;
            }
            let alpha = if v[0] > T::zero() { -norm } else { norm };
            v[0] -= alpha;
            let vnorm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
            if vnorm == T::zero() {
                off[k] = alpha;
                continue;
            }
            for x in v.iter_mut() {
                *x /= vnorm;
            }
            // p = 2·S·v, K = vᵀp, q = p − K·v, S ← S − v·qᵀ − q·vᵀ
            let p: Vec<T> = (0..len)
                .map(|i| two * (0..len).map(|j| m[(k + 1 + i, k + 1 + j)] * v[j]).sum::<T>())
                .collect();
            let kk: T = v.iter().zip(&p).map(|(&a, &b)| a * b).sum();
            let q: Vec<T> = p.iter().zip(&v).map(|(&pi, &vi)| pi - kk * vi).collect();
            for i in 0..len {
                for j in 0..len {
                    m[(k + 1 + i, k + 1 + j)] -= v[i] * q[j] + q[i] * v[j];
                }
            }
            off[k] = alpha;
        }
        if n >= 2 {
            diag[n - 2] = m[(n - 2, n - 2)];
            off[n - 2] = m[(n - 1, n - 2)];
        }
        if n >= 1 {
            diag[n - 1] = m[(n - 1, n - 1)];
        }
        Self { diag, off }
    }

    fn order(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `sigma` (Sturm sequence).
    fn count_below(&self, sigma: T) -> usize {
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut q = T::one();
        for i in 0..self.order() {
            let e2 = if i == 0 { T::zero() } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - sigma - if i == 0 { T::zero() } else { e2 / q };
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
        let n = self.order();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based), by bisection on the Sturm count.
    pub fn kth_eigenvalue(&self, k: usize) -> T {
        let n = self.order();
        assert!(k < n, "eigenvalue index out of range");
        if n == 1 {
            return self.diag[0];
        }
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(T::min_positive_value());
        let pad = scale * T::epsilon() * T::lit(4.0);
        lo -= pad;
        hi += pad;
        let half = T::lit(0.5);
        for _ in 0..200 {
            let mid = lo + (hi - lo) * half;
            if mid <= lo || mid >= hi || (hi - lo) <= scale * T::epsilon() * T::lit(2.0) {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo + (hi - lo) * half
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        (0..self.order()).map(|k| self.kth_eigenvalue(k)).collect()
    }
}
