//! Designs for the case where Willie's instantaneous channels are unknown.
//!
//! With Rayleigh-faded Willie links the covertness constraint only involves
//! the mean received power, `(p_a/σ_w²)·δ ≤ ε̄` with
//! `δ = χ_rw·Σρ_n²|h_ar,n|² + χ_aw`. Phases then only serve Bob.

use crate::covertness::{epsilon_bar, expected_kl};
use crate::error::{ensure_len, Error, Result};
use crate::numerics::{bisect_root, RootBracket};
use crate::scalar::{Complex, Real};
use crate::scenario::{bob_snr, cascade_vectors, wrap_phase, ChannelSet, PathGains, ReflectDesign, SystemParams};

/// Everything the no-CSI designs need from one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct NoCsiInstance<T> {
    pub h_ar: Vec<Complex<T>>,
    pub b: Vec<Complex<T>>,
    pub h_ab: Complex<T>,
    pub chi_rw: T,
    pub chi_aw: T,
    pub eps_bar: T,
    pub sigma_w2: T,
    pub sigma_b2: T,
    pub p_max: T,
    pub blocklength: u32,
}

impl<T: Real> NoCsiInstance<T> {
    pub fn from_channels(ch: &ChannelSet<T>, gains: &PathGains<T>, params: &SystemParams<T>) -> Result<Self> {
        let (_, b) = cascade_vectors(ch);
        let inst = Self {
            h_ar: ch.h_ar.clone(),
            b,
            h_ab: ch.h_ab,
            chi_rw: gains.chi_rw,
            chi_aw: gains.chi_aw,
            eps_bar: epsilon_bar(&params.budget()?)?,
            sigma_w2: params.sigma_w2,
            sigma_b2: params.sigma_b2,
            p_max: params.p_max,
            blocklength: params.blocklength,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_len(self.h_ar.len(), self.b.len())?;
        let positive = self.eps_bar > T::zero()
            && self.chi_rw >= T::zero()
            && self.chi_aw > T::zero()
            && self.sigma_w2 > T::zero()
            && self.sigma_b2 > T::zero()
            && self.p_max > T::zero();
        if positive {
            Ok(())
        } else {
            Err(Error::InvalidParameter("no-CSI instance needs positive gains, noise and eps_bar".into()))
        }
    }

    /// `ε̄·σ_w²`, the bound on `p_a·δ`.
    fn budget(&self) -> T {
        self.eps_bar * self.sigma_w2
    }

    /// `w_n = χ_rw·|h_ar,n|²`
    fn weights(&self) -> Vec<T> {
        self.h_ar.iter().map(|h| self.chi_rw * h.norm_sqr()).collect()
    }

    /// `δ = χ_rw·Σρ_n²|h_ar,n|² + χ_aw`
    pub fn mean_willie_gain(&self, rho: &[T]) -> T {
        self.weights().iter().zip(rho).map(|(&w, &r)| w * r * r).sum::<T>() + self.chi_aw
    }

    fn b_abs(&self) -> Vec<T> {
        self.b.iter().map(|z| z.norm()).collect()
    }

    /// Bob SNR with optimal phases: `(p_a/σ_b²)·(Σρ_n|b_n| + |h_ab|)²`.
    fn coherent_snr(&self, p_a: T, rho: &[T]) -> T {
        let s: T = self.b_abs().iter().zip(rho).map(|(&b, &r)| b * r).sum::<T>() + self.h_ab.norm();
        p_a / self.sigma_b2 * s * s
    }
}

/// `θ_n = arg(h_ab) − arg(b_n)` in `[0, 2π)`: every reflected path arrives in
/// phase with the direct one.
pub fn optimal_phases<T: Real>(b: &[Complex<T>], h_ab: Complex<T>) -> Vec<T> {
    b.iter().map(|bn| wrap_phase(h_ab.arg() - bn.arg())).collect()
}

/// Power for full-amplitude reflection, `min(ε̄σ_w²/(χ_rw‖h_ar‖² + χ_aw), p_max)`.
pub fn power_unit_amplitude<T: Real>(inst: &NoCsiInstance<T>) -> T {
    let delta = inst.mean_willie_gain(&vec![T::one(); inst.h_ar.len()]);
    (inst.budget() / delta).min(inst.p_max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonAmplitude<T> {
    pub rho0: T,
    pub p_a: T,
    pub snr: T,
}

/// Best common amplitude `ρ₀` with jointly optimal power.
///
/// Either the power budget binds (`p_a = p_max`, largest admissible `ρ₀`) or
/// the covertness constraint does (`p_a` set by it, `ρ₀` among the interval
/// endpoints and the interior stationary point). Ties go to the covertness-bound
/// case, which uses less power.
pub fn common_amplitude_design<T: Real>(inst: &NoCsiInstance<T>) -> CommonAmplitude<T> {
    let k = inst.budget();
    let h_energy: T = inst.h_ar.iter().map(|h| h.norm_sqr()).sum();
    let w_sum = inst.chi_rw * h_energy;
    let b1: T = inst.b_abs().iter().copied().sum();
    let hab = inst.h_ab.norm();
    let objective = |rho: T, p: T| p.sqrt() * (rho * b1 + hab);
    let power_at = |rho: T| (k / (w_sum * rho * rho + inst.chi_aw)).min(inst.p_max);
    let finish = |rho0: T, p_a: T| CommonAmplitude {
        rho0,
        p_a,
        snr: objective(rho0, p_a).powi(2) / inst.sigma_b2,
    };

    if !(w_sum > T::zero()) {
        return finish(T::one(), power_at(T::one()));
    }
    let thr = (k / inst.p_max - inst.chi_aw) / w_sum;

    let case_a = (thr >= T::zero()).then(|| {
        let rho = thr.sqrt().min(T::one());
        (rho, inst.p_max)
    });

    let case_b = (thr <= T::one()).then(|| {
        let lo = thr.max(T::zero()).sqrt();
        let mut candidates = vec![lo, T::one()];
        if hab > T::zero() {
            let stationary = inst.chi_aw * b1 / (w_sum * hab);
            if stationary > lo && stationary < T::one() {
                candidates.push(stationary);
            }
        }
        candidates
            .into_iter()
            .map(|rho| (rho, power_at(rho)))
            .fold(None, |best: Option<(T, T)>, cand| match best {
                Some(b) if objective(b.0, b.1) >= objective(cand.0, cand.1) => Some(b),
                _ => Some(cand),
            })
            .expect("candidate list is non-empty")
    });

    match (case_a, case_b) {
        (Some(a), Some(b)) => {
            if objective(b.0, b.1) >= objective(a.0, a.1) {
                finish(b.0, b.1)
            } else {
                finish(a.0, a.1)
            }
        }
        (Some(a), None) => finish(a.0, a.1),
        (None, Some(b)) => finish(b.0, b.1),
        (None, None) => unreachable!("thr < 0 implies thr <= 1"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerElement<T> {
    pub rho: Vec<T>,
    pub p_a: T,
    pub snr: T,
    /// Largest relative stationarity violation of the inner problem at `p_a`.
    pub kkt_residual: T,
    /// Multiplier of the covertness constraint in the inner problem.
    pub multiplier: T,
}

/// Inner problem at fixed power: maximize `Σρ_n·b̄_n` subject to
/// `Σw_nρ_n² ≤ r`, `0 ≤ ρ_n ≤ 1`. Returns `(ρ, ν)`; `ρ_n = min(1, b̄_n/(2νw_n))`.
fn inner_amplitudes<T: Real>(b_abs: &[T], w: &[T], r: T) -> (Vec<T>, T) {
    let n = b_abs.len();
    if r <= T::zero() {
        // only elements that Willie cannot see remain usable
        return ((0..n).map(|i| if w[i] > T::zero() { T::zero() } else { T::one() }).collect(), T::zero());
    }
    let total: T = w.iter().copied().sum();
    if total <= r {
        return (vec![T::one(); n], T::zero());
    }
    let amps = |nu: T| -> Vec<T> {
        (0..n)
            .map(|i| {
                if w[i] <= T::zero() {
                    T::one()
                } else {
                    (b_abs[i] / (T::lit(2.0) * nu * w[i])).min(T::one())
                }
            })
            .collect()
    };
    let used = |rho: &[T]| -> T { rho.iter().zip(w).map(|(&p, &wi)| wi * p * p).sum() };
    // bracket in ln ν: all clamped at the smallest threshold, none above the unclamped bound
    let thresholds = (0..n)
        .filter(|&i| w[i] > T::zero() && b_abs[i] > T::zero())
        .map(|i| b_abs[i] / (T::lit(2.0) * w[i]));
    let nu_lo = thresholds.fold(T::infinity(), T::min);
    if !nu_lo.is_finite() || used(&amps(nu_lo)) <= r {
        // every element worth lighting fits at full amplitude
        let rho = (0..n)
            .map(|i| if w[i] > T::zero() && b_abs[i] == T::zero() { T::zero() } else { T::one() })
            .collect();
        return (rho, T::zero());
    }
    let unclamped: T = (0..n)
        .filter(|&i| w[i] > T::zero())
        .map(|i| b_abs[i] * b_abs[i] / (T::lit(4.0) * w[i]))
        .sum();
    let nu_hi = (unclamped / r).sqrt() * T::lit(1.01);
    let f = |s: T| used(&amps(s.exp())) - r;
    let (lo, hi) = (nu_lo.ln() - T::lit(1e-3), nu_hi.max(nu_lo).ln() + T::lit(1e-3));
    let nu = RootBracket::new(lo, hi, T::min_positive_value(), 4000)
        .and_then(|b| bisect_root(f, &b))
        .map(T::exp)
        .unwrap_or(nu_hi);
    let mut rho = amps(nu);
    // land exactly on the constraint boundary against bisection round-off
    let u = used(&rho);
    if u > r {
        let s = (r / u).sqrt();
        rho.iter_mut().for_each(|p| *p *= s);
    }
    (rho, nu)
}

/// Per-element amplitudes with jointly optimal power.
///
/// The optimal value is concave in `p_a`, so a golden-section search over
/// `p_a` is run on the bracket picked by a 64-point scan.
pub fn per_element_design<T: Real>(inst: &NoCsiInstance<T>) -> PerElement<T> {
    let k = inst.budget();
    let w = inst.weights();
    let b_abs = inst.b_abs();
    let hab = inst.h_ab.norm();
    let p_hi = inst.p_max.min(k / inst.chi_aw);
    let value = |p: T| -> T {
        if p <= T::zero() {
            return T::zero();
        }
        let r = (k - p * inst.chi_aw) / p;
        let (rho, _) = inner_amplitudes(&b_abs, &w, r);
        p.sqrt() * (rho.iter().zip(&b_abs).map(|(&x, &y)| x * y).sum::<T>() + hab)
    };

    const SCAN: usize = 64;
    let grid: Vec<T> = (0..=SCAN).map(|i| p_hi * T::lit(i as f64) / T::lit(SCAN as f64)).collect();
    let vals: Vec<T> = grid.iter().map(|&p| value(p)).collect();
    let best = (0..=SCAN).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(SCAN)]);

    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (value(x1), value(x2));
    for _ in 0..200 {
        if hi - lo <= p_hi * T::tol(1e-14) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = value(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = value(x1);
        }
    }
    // best of the refined point and the scan (covers maxima at the ends)
    let mut p_a = if f1 >= f2 { x1 } else { x2 };
    if vals[best] > value(p_a) {
        p_a = grid[best];
    }

    let r = (k - p_a * inst.chi_aw) / p_a;
    let (rho, nu) = inner_amplitudes(&b_abs, &w, r);
    let scale = b_abs.iter().copied().fold(T::zero(), T::max).max(T::min_positive_value());
    let kkt_residual = (0..rho.len())
        .filter(|&i| w[i] > T::zero() && rho[i] < T::one() && nu > T::zero())
        .map(|i| (b_abs[i] - T::lit(2.0) * nu * w[i] * rho[i]).abs() / scale)
        .fold(T::zero(), T::max);
    PerElement {
        snr: inst.coherent_snr(p_a, &rho),
        rho,
        p_a,
        kkt_residual,
        multiplier: nu,
    }
}

/// The three no-CSI designs, phases applied.
#[derive(Debug, Clone, PartialEq)]
pub struct NoCsiSuite<T> {
    pub unit: ReflectDesign<T>,
    pub common: ReflectDesign<T>,
    pub per_element: ReflectDesign<T>,
}

fn assemble<T: Real>(inst: &NoCsiInstance<T>, theta: &[T], rho: Vec<T>, p_a: T) -> Result<ReflectDesign<T>> {
    let delta = inst.mean_willie_gain(&rho);
    let v: Vec<_> = rho.iter().zip(theta).map(|(&r, &t)| Complex::from_polar(r, -t)).collect();
    let kl_value = if p_a > T::zero() {
        expected_kl(p_a, delta, inst.sigma_w2, inst.blocklength)?
    } else {
        T::zero()
    };
    Ok(ReflectDesign {
        p_a,
        bob_snr: bob_snr(p_a, &v, &inst.b, inst.h_ab, inst.sigma_b2),
        rho,
        theta: theta.to_vec(),
        willie_gain: delta,
        kl_value,
    })
}

/// Runs the unit, common and per-element designs. `willie_gain` holds the
/// mean gain `δ` and `kl_value` the expected KL divergence.
pub fn no_csi_suite<T: Real>(inst: &NoCsiInstance<T>) -> Result<NoCsiSuite<T>> {
    inst.validate()?;
    let n = inst.h_ar.len();
    let theta = optimal_phases(&inst.b, inst.h_ab);
    let unit = assemble(inst, &theta, vec![T::one(); n], power_unit_amplitude(inst))?;
    let c = common_amplitude_design(inst);
    let common = assemble(inst, &theta, vec![c.rho0; n], c.p_a)?;
    let pe = per_element_design(inst);
    let per_element = assemble(inst, &theta, pe.rho, pe.p_a)?;
    Ok(NoCsiSuite { unit, common, per_element })
}

/// No-surface reference under the same mean-power constraint:
/// `p_a = min(ε̄σ_w²/χ_aw, p_max)`.
pub fn baseline_no_irs_no_csi<T: Real>(inst: &NoCsiInstance<T>) -> Result<ReflectDesign<T>> {
    let p_a = (inst.budget() / inst.chi_aw).min(inst.p_max);
    Ok(ReflectDesign {
        p_a,
        rho: Vec::new(),
        theta: Vec::new(),
        bob_snr: p_a * inst.h_ab.norm_sqr() / inst.sigma_b2,
        willie_gain: inst.chi_aw,
        kl_value: expected_kl(p_a, inst.chi_aw, inst.sigma_w2, inst.blocklength)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(h_ar: Vec<Complex<f64>>, b: Vec<Complex<f64>>, h_ab: f64, chi_rw: f64, chi_aw: f64) -> NoCsiInstance<f64> {
        NoCsiInstance {
            h_ar,
            b,
            h_ab: Complex::new(h_ab, 0.0),
            chi_rw,
            chi_aw,
            eps_bar: 0.0145,
            sigma_w2: 1.0,
            sigma_b2: 1.0,
            p_max: 10.0,
            blocklength: 100,
        }
    }

    #[test]
    fn phases_real_positive() {
        let th = optimal_phases(&[Complex::new(2.0, 0.0), Complex::new(0.5, 0.0)], Complex::new(1.0, 0.0));
        assert_eq!(th, vec![0.0, 0.0]);
    }

    #[test]
    fn unit_power_clamps() {
        let mut i = inst(vec![Complex::new(1.0, 0.0)], vec![Complex::new(1.0, 0.0)], 1.0, 1.0, 1.0);
        assert!((power_unit_amplitude(&i) - 0.0145 / 2.0).abs() < 1e-15);
        i.eps_bar = 1e6;
        assert_eq!(power_unit_amplitude(&i), 10.0);
    }

    #[test]
    fn inner_problem_structure() {
        // all fit → ones; nothing allowed → zeros
        let (rho, nu) = inner_amplitudes(&[1.0, 2.0], &[1.0, 1.0], 5.0);
        assert_eq!((rho, nu), (vec![1.0, 1.0], 0.0));
        let (rho, _) = inner_amplitudes(&[1.0, 2.0], &[1.0, 1.0], 0.0);
        assert_eq!(rho, vec![0.0, 0.0]);
        // equal weights → ρ ∝ b̄ on the sphere Σρ² = r
        let (rho, nu) = inner_amplitudes(&[1.0, 2.0], &[1.0, 1.0], 0.5);
        let s: f64 = rho.iter().map(|x| x * x).sum();
        assert!((s - 0.5).abs() < 1e-14);
        assert!((rho[1] / rho[0] - 2.0).abs() < 1e-12);
        assert!((1.0 - 2.0 * nu * rho[0]).abs() < 1e-12);
    }
}
