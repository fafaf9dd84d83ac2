use crate::error::{Error, Result};
use crate::scalar::Real;

/// Search interval and stopping rule for [`bisect_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket<T> {
    pub lo: T,
    pub hi: T,
    /// Absolute tolerance, applied both to the residual and to the interval width.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> RootBracket<T> {
    pub fn new(lo: T, hi: T, tol: T, max_iter: usize) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "bracket requires lo < hi (got {lo}, {hi})"
            )));
        }
        if !(tol > T::zero()) {
            return Err(Error::InvalidParameter(format!("bracket tolerance must be positive (got {tol})")));
        }
        Ok(Self { lo, hi, tol, max_iter })
    }
}

/// Bisection on a function with a sign change over `bracket`.
///
/// An endpoint where `f` vanishes exactly is returned as is. The search stops
/// when `|f(x)| < tol`, when the interval is narrower than `tol`, or when the
/// midpoint can no longer be separated from an endpoint in floating point.
pub fn bisect_root<T, F>(mut f: F, bracket: &RootBracket<T>) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let half = T::lit(0.5);
    for _ in 0..bracket.max_iter {
        let mid = lo + (hi - lo) * half;
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid.abs() < bracket.tol || (hi - lo) < bracket.tol {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        what: "bisection",
        iterations: bracket.max_iter,
    })
}
