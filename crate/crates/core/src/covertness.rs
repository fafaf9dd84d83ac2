//! Detection-theoretic quantities: KL divergence at Willie, the detection
//! error bound it implies, and the scalar radii that turn the covertness
//! constraint into a bound on received power.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bisect_root, expected_kl_kernel, RootBracket};
use crate::scalar::Real;

/// Covertness level `ε` together with the blocklength `L`.
///
/// The KL budget is `2ε²` nats over the whole block, i.e. `2ε²/L` per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovertnessBudget<T> {
    epsilon: T,
    blocklength: u32,
}

impl<T: Real> CovertnessBudget<T> {
    /// `ε = 0` is accepted and means "no detectable transmission at all".
    pub fn new(epsilon: T, blocklength: u32) -> Result<Self> {
        if !(epsilon >= T::zero() && epsilon <= T::one()) {
            return Err(Error::Domain {
                what: "covertness level",
                value: epsilon.as_f64(),
                expected: "0 <= epsilon <= 1",
            });
        }
        if blocklength == 0 {
            return Err(Error::InvalidParameter("blocklength must be at least 1".into()));
        }
        Ok(Self { epsilon, blocklength })
    }

    #[inline]
    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    #[inline]
    pub fn blocklength(&self) -> u32 {
        self.blocklength
    }

    #[inline]
    fn l(&self) -> T {
        T::lit(self.blocklength as f64)
    }

    /// `2ε²`
    pub fn kl_cap(&self) -> T {
        T::lit(2.0) * self.epsilon * self.epsilon
    }

    /// `2ε²/L`
    pub fn per_use_cap(&self) -> T {
        self.kl_cap() / self.l()
    }
}

/// `ln(1+x) − x/(1+x)`, the per-use KL divergence at received SNR `x`.
///
/// Below `x = 1e-3` the alternating series is summed directly because the
/// two terms agree to leading order.
pub fn kl_per_use<T: Real>(x: T) -> T {
    if x < T::lit(1e-3) {
        // Σ_{k≥2} (−1)^k (k−1)/k x^k
        let mut pow = x * x;
        let mut sum = T::zero();
        let mut sign = T::one();
        for k in 2..16 {
            let kf = T::lit(k as f64);
            sum += sign * (kf - T::one()) / kf * pow;
            pow *= x;
            sign = -sign;
        }
        sum
    } else {
        x.ln_1p() - x / (T::one() + x)
    }
}

fn check_non_negative<T: Real>(what: &'static str, v: T) -> Result<()> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: v.as_f64(),
            expected: ">= 0",
        })
    }
}

/// KL divergence of Willie's `L`-sample observations, in nats.
pub fn kl_divergence<T: Real>(p_a: T, gain: T, sigma_w2: T, blocklength: u32) -> Result<T> {
    check_non_negative("transmit power", p_a)?;
    check_non_negative("channel gain", gain)?;
    if !(sigma_w2 > T::zero()) {
        return Err(Error::Domain {
            what: "noise power",
            value: sigma_w2.as_f64(),
            expected: "> 0",
        });
    }
    let x = p_a * gain / sigma_w2;
    Ok(T::lit(blocklength as f64) * kl_per_use(x))
}

/// Lower bound `1 − √(D/2)` on Willie's total detection error, floored at 0.
pub fn detection_error_lower_bound<T: Real>(kl: T) -> T {
    debug_assert!(kl >= T::zero(), "KL divergence is non-negative");
    (T::one() - (kl.max(T::zero()) / T::lit(2.0)).sqrt()).max(T::zero())
}

/// Largest per-use SNR `t*` at Willie compatible with the budget.
///
/// The covertness constraint is monotone in the received SNR `x`, so it is
/// exactly `x ≤ t*` where `t*` is the positive root of
/// `(1+t)·ln(1+t) − (1+c)·t − c` with `c = 2ε²/L`.
pub fn kl_radius<T: Real>(budget: &CovertnessBudget<T>) -> Result<T> {
    let c = budget.per_use_cap();
    if c == T::zero() {
        return Ok(T::zero());
    }
    let f = |t: T| kl_per_use(t) - c;
    let mut hi = T::one();
    let mut doublings = 0;
    while f(hi) < T::zero() {
        hi *= T::lit(2.0);
        doublings += 1;
        if doublings > 1100 || !hi.is_finite() {
            return Err(Error::Convergence {
                what: "kl_radius bracketing",
                iterations: doublings,
            });
        }
    }
    let bracket = RootBracket::new(T::zero(), hi, T::min_positive_value(), 4000)?;
    bisect_root(f, &bracket)
}

/// Closed-form `y*` from the tightened constraint `x − x/(1+x) ≤ 2ε²/L`.
///
/// Since `ln(1+x) ≤ x`, `y* ≤ t*` always.
pub fn conservative_kl_radius<T: Real>(budget: &CovertnessBudget<T>) -> T {
    let e2 = budget.epsilon * budget.epsilon;
    let l = budget.l();
    (e2 + (e2 * e2 + T::lit(2.0) * e2 * l).sqrt()) / l
}

/// Expected KL divergence when Willie's received power is exponential with
/// mean `δ·p_a` (Rayleigh-faded total channel).
pub fn expected_kl<T: Real>(p_a: T, delta: T, sigma_w2: T, blocklength: u32) -> Result<T> {
    let x_hat = delta * p_a / sigma_w2;
    if !(x_hat > T::zero()) || !x_hat.is_finite() {
        return Err(Error::Domain {
            what: "expected_kl mean SNR",
            value: x_hat.as_f64(),
            expected: "> 0",
        });
    }
    Ok(T::lit(blocklength as f64) * expected_kl_kernel(x_hat.recip())?)
}

/// Mean-SNR threshold `ε̄` with `expected_kl = 2ε²` at `x̂ = ε̄`.
///
/// Solved in `s = ln(1/ε̄)` because the kernel is monotone in `u = 1/ε̄` and
/// the root spans many decades as `ε` and `L` vary.
pub fn epsilon_bar<T: Real>(budget: &CovertnessBudget<T>) -> Result<T> {
    let c = budget.per_use_cap();
    if !(c > T::zero()) {
        return Err(Error::Domain {
            what: "epsilon_bar",
            value: budget.epsilon.as_f64(),
            expected: "epsilon > 0",
        });
    }
    let f = |s: T| expected_kl_kernel(s.exp()).map(|g| g - c).unwrap_or(T::nan());
    let mut lo = T::lit(1e-6).ln();
    let mut hi = T::lit(1e6).ln();
    let step = T::lit(10.0).ln() * T::lit(3.0);
    let min_s = T::min_positive_value().ln() + step;
    let max_s = T::max_value().ln() - step;
    while f(lo) < T::zero() && lo > min_s {
        lo -= step;
    }
    while f(hi) > T::zero() && hi < max_s {
        hi += step;
    }
    let bracket = RootBracket::new(lo, hi, T::min_positive_value(), 4000)?;
    let s = bisect_root(f, &bracket)?;
    Ok((-s).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn budget(eps: f64, l: u32) -> CovertnessBudget<f64> {
        CovertnessBudget::new(eps, l).unwrap()
    }

    #[test]
    fn budget_validation() {
        assert!(CovertnessBudget::new(1.5, 10).is_err());
        assert!(CovertnessBudget::new(-0.1, 10).is_err());
        assert!(CovertnessBudget::new(0.1, 0).is_err());
        let b = budget(0.1, 100);
        assert_relative_eq!(b.kl_cap(), 0.02, max_relative = 1e-15);
        assert_relative_eq!(b.per_use_cap(), 2e-4, max_relative = 1e-15);
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(0.0, 1.0, 1.0, 100).unwrap(), 0.0);
        assert_relative_eq!(
            kl_divergence(1.0, 1.0, 1.0, 100).unwrap(),
            100.0 * (2f64.ln() - 0.5),
            max_relative = 1e-14
        );
        let small = kl_divergence(1e-6, 1.0, 1.0, 100).unwrap();
        assert_relative_eq!(small, 5e-11, max_relative = 1e-2);
        assert!(kl_divergence(-1.0, 1.0, 1.0, 1).is_err());
        assert!(kl_divergence(1.0, -1.0, 1.0, 1).is_err());
    }

    #[test]
    fn series_branch_is_continuous() {
        let x = 1e-3_f64;
        let direct = x.ln_1p() - x / (1.0 + x);
        assert_relative_eq!(kl_per_use(x * (1.0 - 1e-12)), direct, max_relative = 1e-9);
    }

    #[test]
    fn detection_bound() {
        assert_eq!(detection_error_lower_bound(0.0), 1.0);
        assert_eq!(detection_error_lower_bound(2.0), 0.0);
        assert_eq!(detection_error_lower_bound(5.0), 0.0);
        assert_relative_eq!(detection_error_lower_bound(2.0 * 0.01), 0.9, max_relative = 1e-15);
    }

    #[test]
    fn radius_limits() {
        assert_eq!(kl_radius(&budget(0.0, 100)).unwrap(), 0.0);
        assert_eq!(conservative_kl_radius(&budget(0.0, 100)), 0.0);
        assert!(kl_radius(&budget(1e-4, 100)).unwrap() < 1e-3);
        assert_relative_eq!(
            conservative_kl_radius(&budget(0.1, 100)),
            (0.01 + (1e-4f64 + 2.0).sqrt()) / 100.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn epsilon_bar_rejects_zero() {
        assert!(matches!(epsilon_bar(&budget(0.0, 100)), Err(Error::Domain { .. })));
        assert!(expected_kl(0.0, 1.0, 1.0, 10).is_err());
    }
}
