//! Exponential integral `E1` and its exponentially scaled form.
//!
//! `E1(x) = ∫ₓ^∞ e^(−t)/t dt` is evaluated with the convergent power series on
//! `(0, 1]` and with a modified-Lentz continued fraction above 1. The continued
//! fraction naturally produces `e^x·E1(x)`, which is what the expected-KL
//! machinery needs: it stays finite where `e^x` alone would overflow.

use crate::error::{Error, Result};
use crate::scalar::Real;

const TERM_CUTOFF: f64 = 1e-14;
const MAX_TERMS: usize = 10_000;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn check_positive<T: Real>(what: &'static str, x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: x.as_f64(),
            expected: "x > 0",
        })
    }
}

/// `E1(x)` for `x > 0`. Underflows to zero beyond `x ≈ 745` in `f64`.
pub fn exp_integral_e1<T: Real>(x: T) -> Result<T> {
    check_positive("exp_integral_e1", x)?;
    if x <= T::one() {
        Ok(e1_series(x))
    } else {
        Ok(scaled_e1_continued_fraction(x) * (-x).exp())
    }
}

/// `e^x·E1(x)` for `x > 0`, computed without forming `e^x` when `x > 1`.
pub fn scaled_e1<T: Real>(x: T) -> Result<T> {
    check_positive("scaled_e1", x)?;
    if x <= T::one() {
        Ok(e1_series(x) * x.exp())
    } else {
        Ok(scaled_e1_continued_fraction(x))
    }
}

/// `(1 + u)·e^u·E1(u) − 1` for `u > 0`.
///
/// This is the function whose level sets define the no-CSI covertness
/// constant. For large `u` the direct form cancels catastrophically (the
/// value behaves like `1/u²`), so an asymptotic expansion is used there:
/// `Σ_{k≥1} (−1)^(k+1)·k·k!/u^(k+1)`.
pub fn expected_kl_kernel<T: Real>(u: T) -> Result<T> {
    check_positive("expected_kl_kernel", u)?;
    if u >= T::lit(ASYMPTOTIC_FROM) {
        return Ok(kernel_asymptotic(u));
    }
    Ok((T::one() + u) * scaled_e1(u)? - T::one())
}

const ASYMPTOTIC_FROM: f64 = 200.0;

fn kernel_asymptotic<T: Real>(u: T) -> T {
    let tol = T::tol(1e-17);
    let inv = u.recip();
    // k = 1 term; factorial tracked as k! / u^(k+1).
    let mut fact_pow = inv * inv; // 1!/u²
    let mut sum = fact_pow;
    let mut prev = fact_pow.abs();
    let mut sign = T::one();
    for k in 2..64 {
        let kf = T::lit(k as f64);
        fact_pow = fact_pow * kf * inv;
        sign = -sign;
        let term = sign * kf * fact_pow;
        // Asymptotic series: stop at the smallest term.
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() <= tol * sum.abs() {
            break;
        }
    }
    sum
}

fn e1_series<T: Real>(x: T) -> T {
    let tol = T::tol(TERM_CUTOFF);
    let mut term = T::one();
    let mut sum = T::zero();
    for k in 1..MAX_TERMS {
        let kf = T::lit(k as f64);
        term = term * (-x) / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() < tol * sum.abs().max(T::min_positive_value()) {
            break;
        }
    }
    -T::lit(EULER_GAMMA) - x.ln() - sum
}

fn scaled_e1_continued_fraction<T: Real>(x: T) -> T {
    let tol = T::tol(TERM_CUTOFF);
    let tiny = T::min_positive_value() / T::epsilon();
    let two = T::lit(2.0);
    let mut b = x + T::one();
    let mut c = tiny.recip();
    let mut d = b.recip();
    let mut h = d;
    for i in 1..MAX_TERMS {
        let fi = T::lit(i as f64);
        let an = -fi * fi;
        b += two;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        h *= delta;
        if (delta - T::one()).abs() < tol {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values from 40-digit evaluation of the defining integral.
    const E1_AT_1: f64 = 0.219_383_934_395_520_27;
    const E1_AT_10: f64 = 4.156_968_929_685_324e-6;
    const SCALED_AT_1: f64 = 0.596_347_362_323_194_1;

    #[test]
    fn reference_points() {
        assert!((exp_integral_e1(1.0).unwrap() - E1_AT_1).abs() < 1e-12);
        assert!((exp_integral_e1(10.0).unwrap() - E1_AT_10).abs() < 1e-12);
        assert_relative_eq!(exp_integral_e1(0.5).unwrap(), 0.559_773_594_776_160_8, max_relative = 1e-13);
        assert_relative_eq!(exp_integral_e1(2.0).unwrap(), 0.048_900_510_708_061_12, max_relative = 1e-12);
        assert_relative_eq!(scaled_e1(1.0).unwrap(), SCALED_AT_1, max_relative = 1e-13);
    }

    #[test]
    fn large_argument_asymptotics() {
        let x = 500.0_f64;
        let lead = x * scaled_e1(x).unwrap();
        assert!((lead - 1.0).abs() < 1e-2);
        let s700 = scaled_e1(700.0_f64).unwrap();
        assert!(s700.is_finite());
        assert_relative_eq!(s700, 0.001_426_536_418_300_886_7, max_relative = 1e-12);
        assert!((s700 * 700.0 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(matches!(exp_integral_e1(0.0), Err(Error::Domain { .. })));
        assert!(matches!(exp_integral_e1(-1.0), Err(Error::Domain { .. })));
        assert!(scaled_e1(-2.0_f64).is_err());
        assert!(scaled_e1(f64::NAN).is_err());
    }

    #[test]
    fn kernel_matches_direct_form_across_switch() {
        for &u in &[150.0_f64, 199.0, 201.0, 250.0] {
            let direct = (1.0 + u) * scaled_e1(u).unwrap() - 1.0;
            let k = expected_kl_kernel(u).unwrap();
            assert_relative_eq!(k, direct, max_relative = 1e-9);
        }
        // leading 1/u² behaviour far out
        let u = 1e6_f64;
        assert_relative_eq!(expected_kl_kernel(u).unwrap(), 1.0 / (u * u), max_relative = 1e-5);
    }

    #[test]
    fn works_in_single_precision() {
        let v: f32 = exp_integral_e1(1.0_f32).unwrap();
        assert!((v - E1_AT_1 as f32).abs() < 1e-6);
        let s: f32 = scaled_e1(3.0_f32).unwrap();
        assert!((s as f64 - 3.0_f64.exp() * 0.013_048_381_094_197_04).abs() < 1e-5);
    }
}
