use crate::error::{Error, Result};
use crate::numerics::dense::RealMatrix;
use crate::scalar::{Complex, Real};

/// Dense Hermitian matrix. Construction enforces `H = Hᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

/// Relative asymmetry above which input is rejected as non-Hermitian.
const HERMITIAN_TOL: f64 = 1e-10;

impl<T: Real> HermitianMatrix<T> {
    /// Validates and stores a row-major matrix. Entries within the tolerance
    /// are symmetrized exactly and the diagonal is made real.
    pub fn new(n: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        let scale = data.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                let d = (data[i * n + j] - data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        if worst > T::lit(HERMITIAN_TOL) * scale {
            return Err(Error::NotHermitian {
                asymmetry: (worst / scale).as_f64(),
            });
        }
        Ok(Self::from_fn(n, |i, j| data[i * n + j]))
    }

    /// Builds from the upper triangle of `f`; the lower triangle is mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            for j in i..n {
                let z = f(i, j);
                if i == j {
                    data[i * n + i] = Complex::new(z.re, T::zero());
                } else {
                    data[i * n + j] = z;
                    data[j * n + i] = z.conj();
                }
            }
        }
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| Complex::new(T::zero(), T::zero()))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        Self::from_fn(d.len(), |i, j| {
            if i == j {
                Complex::new(d[i], T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    /// `scale·w·wᴴ`
    pub fn outer(w: &[Complex<T>], scale: T) -> Self {
        Self::from_fn(w.len(), |i, j| w[i] * w[j].conj() * scale)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i).re).collect()
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i).re).sum()
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(x)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `uᴴ·H·u` (real for Hermitian `H`).
    pub fn quad_form(&self, u: &[Complex<T>]) -> T {
        let hu = self.mul_vec(u);
        u.iter()
            .zip(&hu)
            .fold(T::zero(), |acc, (a, b)| acc + (a.conj() * b).re)
    }

    /// `Tr(self·other)`
    pub fn trace_product(&self, other: &Self) -> T {
        let n = self.n;
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc += (self.get(i, j) * other.get(j, i)).re;
            }
        }
        acc
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest absolute row sum; bounds every eigenvalue in magnitude.
    fn gershgorin_radius(&self) -> T {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().map(|z| z.norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }
}

/// Dominant (largest algebraic) eigenvalue with a unit-norm eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T> {
    pub value: T,
    pub vector: Vec<Complex<T>>,
}

impl<T: Real> EigenPair<T> {
    /// `‖H·e − λ·e‖`
    pub fn residual(&self, h: &HermitianMatrix<T>) -> T {
        h.mul_vec(&self.vector)
            .iter()
            .zip(&self.vector)
            .map(|(&a, &b)| (a - b * self.value).norm_sqr())
            .sum::<T>()
            .sqrt()
    }
}

const POWER_REL_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 10_000;

/// Largest eigenvalue and eigenvector by shifted power iteration.
///
/// The matrix is shifted by its Gershgorin radius so the dominant eigenvalue of
/// the shifted operator is the largest algebraic one. Iteration starts from the
/// normalized all-ones vector and stops on a `1e-12` relative change of the
/// Rayleigh quotient; a few Rayleigh-quotient-iteration steps then polish the
/// vector.
pub fn max_eigpair<T: Real>(h: &HermitianMatrix<T>) -> EigenPair<T> {
    let n = h.order();
    let zero = Complex::new(T::zero(), T::zero());
    if n == 0 {
        return EigenPair {
            value: T::zero(),
            vector: Vec::new(),
        };
    }
    let start = Complex::new(T::lit(n as f64).sqrt().recip(), T::zero());
    let mut x = vec![start; n];
    let shift = h.gershgorin_radius();
    if shift == T::zero() {
        return EigenPair {
            value: T::zero(),
            vector: x,
        };
    }

    let tol = T::tol(POWER_REL_TOL);
    let mut lambda = h.quad_form(&x);
    for _ in 0..POWER_MAX_ITER {
        let mut y = h.mul_vec(&x);
        for (yi, &xi) in y.iter_mut().zip(&x) {
            *yi = *yi + xi * shift;
        }
        let norm = vec_norm(&y);
        if norm == T::zero() {
            break;
        }
        for yi in y.iter_mut() {
            *yi = *yi / norm;
        }
        x = y;
        let next = h.quad_form(&x);
        let change = (next - lambda).abs();
        lambda = next;
        if change <= tol * lambda.abs().max(shift * T::epsilon()) {
            break;
        }
    }

    let mut best = EigenPair { value: lambda, vector: x };
    let mut best_res = best.residual(h);
    let accept_floor = lambda - shift * T::tol(1e-9);
    for _ in 0..3 {
        if best_res <= T::epsilon() * shift {
            break;
        }
        let Some(mut y) = solve_shifted(h, best.value, &best.vector) else {
            break;
        };
        let norm = vec_norm(&y);
        if !(norm > T::zero()) || !norm.is_finite() {
            break;
        }
        for yi in y.iter_mut() {
            *yi = *yi / norm;
        }
        let value = h.quad_form(&y);
        let cand = EigenPair { value, vector: y };
        let res = cand.residual(h);
        if value >= accept_floor && res < best_res {
            best = cand;
            best_res = res;
        } else {
            break;
        }
    }
    // fix the global phase: largest-modulus entry real and positive
    if let Some(pivot) = best
        .vector
        .iter()
        .copied()
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(std::cmp::Ordering::Equal))
    {
        if pivot != zero {
            let phase = pivot.conj() / pivot.norm();
            for v in best.vector.iter_mut() {
                *v = *v * phase;
            }
        }
    }
    best
}

fn vec_norm<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Solves `(H − μI)·y = rhs` by Gaussian elimination with partial pivoting.
/// Exactly singular pivots are nudged so inverse iteration can proceed.
fn solve_shifted<T: Real>(h: &HermitianMatrix<T>, mu: T, rhs: &[Complex<T>]) -> Option<Vec<Complex<T>>> {
    let n = h.order();
    let mut a: Vec<Complex<T>> = h.entries().to_vec();
    for i in 0..n {
        a[i * n + i] = a[i * n + i] - Complex::new(mu, T::zero());
    }
    let mut b = rhs.to_vec();
    let nudge = h.frobenius_norm() * T::epsilon();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i * n + col]
                .norm()
                .partial_cmp(&a[j * n + col].norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        if a[col * n + col].norm() <= nudge {
            a[col * n + col] = Complex::new(nudge.max(T::min_positive_value()), T::zero());
        }
        let p = a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] / p;
            if factor.norm() == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[r * n + k] = a[r * n + k] - factor * v;
            }
            let bc = b[col];
            b[r] = b[r] - factor * bc;
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s = s - a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Some(b)
}

/// Real symmetric embedding `[[Re H, −Im H], [Im H, Re H]]` of order `2n`.
///
/// `H ⪰ 0` iff the embedding is PSD; each eigenvalue of `H` appears twice.
pub fn hermitian_real_embedding<T: Real>(h: &HermitianMatrix<T>) -> RealMatrix<T> {
    let n = h.order();
    RealMatrix::from_fn(2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let z = h.get(ii, jj);
        match (bi, bj) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    })
}

/// Inverse of [`hermitian_real_embedding`], averaging the redundant blocks.
pub fn hermitian_from_embedding<T: Real>(m: &RealMatrix<T>) -> HermitianMatrix<T> {
    let n = m.order() / 2;
    let half = T::lit(0.5);
    HermitianMatrix::from_fn(n, |i, j| {
        let re = half * (m[(i, j)] + m[(i + n, j + n)]);
        let im = half * (m[(i + n, j)] - m[(i, j + n)]);
        Complex::new(re, im)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn rejects_asymmetric_input() {
        let e = HermitianMatrix::new(2, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)]).unwrap_err();
        assert!(matches!(e, Error::NotHermitian { .. }));
        assert!(HermitianMatrix::new(2, vec![c(1.0, 0.0); 3]).is_err());
        assert!(HermitianMatrix::new(2, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]).is_ok());
    }

    #[test]
    fn identity_and_diagonal() {
        let id = HermitianMatrix::<f64>::identity(3);
        let ep = max_eigpair(&id);
        assert!((ep.value - 1.0).abs() < 1e-14);
        assert!((vec_norm(&ep.vector) - 1.0).abs() < 1e-14);

        let d = HermitianMatrix::from_diagonal(&[1.0_f64, 3.0]);
        let ep = max_eigpair(&d);
        assert!((ep.value - 3.0).abs() < 1e-12);
        assert!(ep.vector[0].norm() < 1e-8);
        assert!((ep.vector[1] - c(1.0, 0.0)).norm() < 1e-8);
        assert!(ep.residual(&d) < 1e-9 * 4.0);
    }

    #[test]
    fn rank_one_spectrum() {
        let a = vec![c(0.3, -0.2), c(-1.1, 0.4), c(0.05, 0.9)];
        let h = HermitianMatrix::outer(&a, 1.0);
        let ep = max_eigpair(&h);
        let norm2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        assert!((ep.value - norm2).abs() < 1e-12 * norm2);
        // eigenvector parallel to a
        let overlap = a.iter().zip(&ep.vector).fold(c(0.0, 0.0), |s, (x, y)| s + x.conj() * y);
        assert!((overlap.norm() - norm2.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn indefinite_matrix_picks_largest_algebraic() {
        let h = HermitianMatrix::from_diagonal(&[-5.0_f64, 2.0, 1.0]);
        let ep = max_eigpair(&h);
        assert!((ep.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn embedding_small_cases() {
        let h = HermitianMatrix::from_diagonal(&[2.0]);
        let e = hermitian_real_embedding(&h);
        assert_eq!(e.as_slice(), &[2.0, 0.0, 0.0, 2.0]);

        let h = HermitianMatrix::new(2, vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]).unwrap();
        let ev = hermitian_real_embedding(&h).symmetric_eigenvalues();
        let want = [-1.0, -1.0, 1.0, 1.0];
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        let e = hermitian_real_embedding(&h);
        assert!((e.trace() - 2.0 * h.trace()).abs() < 1e-15);
        assert_eq!(hermitian_from_embedding(&e), h);
    }
}
