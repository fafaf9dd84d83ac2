//! Dot products in twice the working precision.

use crate::scalar::{Complex, Real};

/// Error-free `a + b = s + e`.
#[inline]
fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// `Σ x_k·y_k` as if accumulated in doubled precision, then rounded once.
fn dot2<T: Real>(terms: impl Iterator<Item = (T, T)>) -> T {
    let (mut p, mut s) = (T::zero(), T::zero());
    for (x, y) in terms {
        let h = x * y;
        let r = x.mul_add(y, -h);
        let (sum, q) = two_sum(p, h);
        p = sum;
        s += q + r;
    }
    p + s
}

/// `xᴴy = Σ conj(x_k)·y_k`, accurate even under heavy cancellation.
pub fn cdot<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(x.len(), y.len());
    cdot_pairs(x.iter().copied().zip(y.iter().copied()))
}

/// [`cdot`] over arbitrary `(x_k, y_k)` pairs.
pub fn cdot_pairs<T: Real, I>(pairs: I) -> Complex<T>
where
    I: Iterator<Item = (Complex<T>, Complex<T>)> + Clone,
{
    let re = dot2(pairs.clone().flat_map(|(a, b)| [(a.re, b.re), (a.im, b.im)]));
    let im = dot2(pairs.flat_map(|(a, b)| [(a.re, b.im), (-a.im, b.re)]));
    Complex::new(re, im)
}
