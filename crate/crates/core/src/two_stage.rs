//! Low-complexity full-CSI design and the perfect-covertness construction.
//!
//! Stage 1 maximizes the ratio `uᴴBu / uᴴAu` over unit-modulus `u` with a
//! linear minorant; stage 2 picks the largest power that keeps the
//! conservative covertness bound.

use crate::covertness::{conservative_kl_radius, kl_radius, CovertnessBudget};
use crate::error::{Error, Result};
use crate::numerics::{cdot, HermitianMatrix};
use crate::psca::QuadraticForms;
use crate::scalar::{Complex, Real};
use crate::scenario::{cancellation_floor, willie_gain, ReflectDesign, SystemParams};

/// `Σ|a_n| ≥ |h_aw|`: the reflected paths can cancel the direct one at Willie.
pub fn perfect_covertness_feasible<T: Real>(a: &[Complex<T>], h_aw: Complex<T>) -> bool {
    a.iter().map(|z| z.norm()).sum::<T>() >= h_aw.norm()
}

/// Reflect vector with `vᴴa = −h_aw`: every element is scaled by
/// `1/κ = |h_aw|/Σ|a_n|` and phased against the direct path.
pub fn perfect_covertness_vector<T: Real>(a: &[Complex<T>], h_aw: Complex<T>) -> Result<Vec<Complex<T>>> {
    let reflect_sum: T = a.iter().map(|z| z.norm()).sum();
    let direct = h_aw.norm();
    if reflect_sum < direct {
        return Err(Error::PerfectCovertnessInfeasible {
            reflect_sum: reflect_sum.as_f64(),
            direct: direct.as_f64(),
        });
    }
    if direct == T::zero() {
        return Ok(vec![Complex::new(T::zero(), T::zero()); a.len()]);
    }
    let inv_kappa = direct / reflect_sum;
    let base = h_aw.arg() + T::PI();
    Ok(a.iter()
        .map(|an| Complex::from_polar(inv_kappa, an.arg() - base))
        .collect())
}

/// Perfect-covertness design at full power.
pub fn perfect_covertness_design<T: Real>(qf: &QuadraticForms<T>, params: &SystemParams<T>) -> Result<ReflectDesign<T>> {
    let v = perfect_covertness_vector(&qf.a, qf.h_aw)?;
    ReflectDesign::from_vector(params.p_max, &v, &qf.a, &qf.b, qf.h_ab, qf.h_aw, params)
}

/// `u = [v; 1]` with unit-modulus `v` phased so every reflected path adds
/// coherently with the direct one at Bob.
pub fn bob_aligned_vector<T: Real>(qf: &QuadraticForms<T>) -> Vec<Complex<T>> {
    let ref_phase = qf.h_ab.arg();
    qf.b.iter()
        .map(|bn| Complex::from_polar(T::one(), bn.arg() - ref_phase))
        .chain([Complex::new(T::one(), T::zero())])
        .collect()
}

/// `min(σ_w²·y*/uᴴAu, p_max)`, with `p_max` when `uᴴAu` is zero to
/// rounding (`A` is rank one, so `Tr A` bounds the rounding level).
pub fn conservative_power<T: Real>(
    u: &[Complex<T>],
    a_matrix: &HermitianMatrix<T>,
    budget: &CovertnessBudget<T>,
    sigma_w2: T,
    p_max: T,
) -> T {
    let u_norm2: T = u.iter().map(|z| z.norm_sqr()).sum();
    let floor = (T::lit(32.0) * T::epsilon()).powi(2) * a_matrix.trace() * u_norm2;
    power_for_gain(a_matrix.quad_form(u), floor, budget, sigma_w2, p_max)
}

fn power_for_gain<T: Real>(gain: T, floor: T, budget: &CovertnessBudget<T>, sigma_w2: T, p_max: T) -> T {
    if gain > floor {
        (sigma_w2 * conservative_kl_radius(budget) / gain).min(p_max)
    } else {
        p_max
    }
}

/// Minorant coefficient vector at `ũ`:
/// `f = (B/sA − (A − λI)·sB/sA²)·ũ` with `sA = ũᴴAũ`, `sB = ũᴴBũ`, `λ = ‖ā‖²`.
pub fn sca_direction<T: Real>(u_tilde: &[Complex<T>], qf: &QuadraticForms<T>) -> Result<Vec<Complex<T>>> {
    crate::error::ensure_len(qf.n_elements() + 1, u_tilde.len())?;
    let s_a = qf.quad_a(u_tilde);
    if !(s_a > T::zero()) {
        return Err(Error::Domain {
            what: "sca_direction denominator uᴴAu",
            value: s_a.as_f64(),
            expected: "> 0",
        });
    }
    let s_b = qf.quad_b(u_tilde);
    let lambda = qf.lambda_max_a();
    // Bũ = b̄·(b̄ᴴũ), Aũ = ā·(āᴴũ)
    let (pb, pa) = (cdot(&qf.b_bar, u_tilde), cdot(&qf.a_bar, u_tilde));
    let k = s_b / (s_a * s_a);
    Ok((0..u_tilde.len())
        .map(|n| qf.b_bar[n] * pb / s_a - (qf.a_bar[n] * pa - u_tilde[n] * lambda) * k)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStageConfig<T> {
    pub max_iter: usize,
    /// Relative change of the true ratio that ends stage 1.
    pub u_tol: T,
}

impl<T: Real> Default for TwoStageConfig<T> {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            u_tol: T::lit(1e-6),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwoStageResult<T> {
    pub design: ReflectDesign<T>,
    /// `uᴴBu/uᴴAu` at the start and after every stage-1 update.
    pub ratio_trace: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Depth at which Willie's channel counts as nulled: `|āᴴu|` within
/// `1e4` ulps of `‖ā‖·‖u‖`. Below it the rounding of `u` itself moves the
/// ratio by more than a phase update can, so further iterations are noise.
fn null_floor<T: Real>(qf: &QuadraticForms<T>, u: &[Complex<T>]) -> T {
    let u_norm2: T = u.iter().map(|z| z.norm_sqr()).sum();
    (T::lit(1e4) * T::epsilon()).powi(2) * qf.lambda_max_a() * u_norm2
}

/// Stage-1 phase search followed by the closed-form covert power.
pub fn two_stage_optimize<T: Real>(
    qf: &QuadraticForms<T>,
    params: &SystemParams<T>,
    config: &TwoStageConfig<T>,
) -> Result<TwoStageResult<T>> {
    let budget = params.budget()?;
    let mut u = bob_aligned_vector(qf);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = true;

    if qf.lambda_max_a() > T::zero() {
        if qf.quad_a(&u) == T::zero() {
            // nudge off an exact null of A, once
            let nudge = T::lit(1e-8);
            let base = bob_aligned_vector(qf);
            let candidate: Vec<_> = u
                .iter()
                .zip(&base)
                .map(|(&x, &b)| {
                    let z = x + b * nudge;
                    z / z.norm()
                })
                .collect();
            if qf.quad_a(&candidate) > T::zero() {
                u = candidate;
            }
        }
        if qf.quad_a(&u) > T::zero() {
            converged = false;
            let mut ratio = qf.quad_b(&u) / qf.quad_a(&u);
            trace.push(ratio);
            for _ in 0..config.max_iter {
                let f = sca_direction(&u, qf)?;
                let next: Vec<_> = f
                    .iter()
                    .zip(&u)
                    .map(|(fn_, &un)| {
                        if fn_.norm() > T::zero() {
                            fn_ / fn_.norm()
                        } else {
                            un
                        }
                    })
                    .collect();
                let s_a = qf.quad_a(&next);
                iterations += 1;
                if s_a <= null_floor(qf, &next) {
                    // perfect cancellation: covertness no longer limits power
                    u = next;
                    converged = true;
                    break;
                }
                let r = qf.quad_b(&next) / s_a;
                trace.push(r);
                let change = (r - ratio).abs();
                u = next;
                let done = change <= config.u_tol * ratio.abs();
                ratio = r;
                if done {
                    converged = true;
                    break;
                }
            }
        }
    }

    // v = u_{1..N}/u_{N+1}, unit modulus
    let last = u[u.len() - 1];
    let phase = last.conj() / last.norm();
    let v: Vec<_> = u[..u.len() - 1].iter().map(|&z| z * phase).collect();
    // same compensated gain and floor that the design reports
    let gain = willie_gain(&v, &qf.a, qf.h_aw);
    let floor = cancellation_floor(&v, &qf.a, qf.h_aw);
    let p_a = power_for_gain(gain, floor, &budget, params.sigma_w2, params.p_max);
    Ok(TwoStageResult {
        design: ReflectDesign::from_vector(p_a, &v, &qf.a, &qf.b, qf.h_ab, qf.h_aw, params)?,
        ratio_trace: trace,
        iterations,
        converged,
    })
}

/// Power-only design without the surface: `p_a = min(σ_w²·t*/|h_aw|², p_max)`.
/// The returned design has no reflecting elements.
pub fn baseline_no_irs<T: Real>(h_ab: Complex<T>, h_aw: Complex<T>, params: &SystemParams<T>) -> Result<ReflectDesign<T>> {
    let t_star = kl_radius(&params.budget()?)?;
    let gain = h_aw.norm_sqr();
    let p_a = if gain > T::zero() {
        (params.sigma_w2 * t_star / gain).min(params.p_max)
    } else {
        params.p_max
    };
    ReflectDesign::from_vector(p_a, &[], &[], &[], h_ab, h_aw, params)
}
