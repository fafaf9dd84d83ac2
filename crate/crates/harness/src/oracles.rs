//! Exhaustive-search oracles for two-element instances, written directly
//! from the problem statements rather than through the design code.

use std::f64::consts::TAU;

use irs_covert::psca::build_quadratic_forms;
use irs_covert::{NoCsiInstance, QuadraticForms, SystemParams, C64};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn complex_normal(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn complex_vec(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_normal(rng)).collect()
}

/// Quadratic forms with standard complex normal channels.
pub fn random_forms(rng: &mut impl Rng, n: usize) -> QuadraticForms {
    let (a, b) = (complex_vec(rng, n), complex_vec(rng, n));
    build_quadratic_forms(&a, &b, complex_normal(rng), complex_normal(rng)).expect("matching lengths")
}

/// Uniform point of the closed unit disc.
pub fn disc_point(rng: &mut impl Rng) -> C64 {
    C64::from_polar(rng.random::<f64>().sqrt(), rng.random::<f64>() * TAU)
}

/// `Σ conj(v_n)·x_n + h`
pub fn effective(v: &[C64], x: &[C64], h: C64) -> C64 {
    v.iter().zip(x).fold(h, |s, (vn, xn)| s + vn.conj() * xn)
}

/// Best full-CSI Bob SNR for `N = 2` over `m` amplitudes in `[0, 1]` and `m`
/// phases in `[0, 2π)` per element. Power is resolved exactly as the largest
/// covert one, `min(p_max, σ_w²·t*/gain)`.
pub fn full_csi_grid_n2(qf: &QuadraticForms, params: &SystemParams, t_star: f64, m: usize) -> f64 {
    assert_eq!(qf.a.len(), 2, "two-element oracle");
    let levels: Vec<C64> = (0..m)
        .flat_map(|i| {
            let rho = i as f64 / (m - 1) as f64;
            (0..m).map(move |k| C64::from_polar(rho, TAU * k as f64 / m as f64))
        })
        .collect();
    let mut best = 0.0f64;
    for &v1 in &levels {
        let (b1, a1) = (v1.conj() * qf.b[0] + qf.h_ab, v1.conj() * qf.a[0] + qf.h_aw);
        for &v2 in &levels {
            let gain = (a1 + v2.conj() * qf.a[1]).norm_sqr();
            let power = if gain > 0.0 { (params.sigma_w2 * t_star / gain).min(params.p_max) } else { params.p_max };
            best = best.max(power * (b1 + v2.conj() * qf.b[1]).norm_sqr() / params.sigma_b2);
        }
    }
    best
}

/// No-CSI Bob SNR at amplitudes `rho` with coherent phases and the largest
/// power allowed by the mean-gain budget.
pub fn nocsi_value(inst: &NoCsiInstance, rho: &[f64]) -> f64 {
    let delta = inst.chi_aw
        + rho
            .iter()
            .zip(&inst.h_ar)
            .map(|(r, h)| inst.chi_rw * r * r * h.norm_sqr())
            .sum::<f64>();
    let p = (inst.eps_bar * inst.sigma_w2 / delta).min(inst.p_max);
    let amp = rho.iter().zip(&inst.b).map(|(r, b)| r * b.norm()).sum::<f64>() + inst.h_ab.norm();
    p * amp * amp / inst.sigma_b2
}

/// Best common-amplitude SNR over `m` values of `ρ ∈ [0, 1]`.
pub fn nocsi_common_grid(inst: &NoCsiInstance, m: usize) -> f64 {
    let n = inst.h_ar.len();
    (0..m)
        .map(|i| nocsi_value(inst, &vec![i as f64 / (m - 1) as f64; n]))
        .fold(0.0, f64::max)
}

/// Best per-element SNR for `N = 2` over an `m × m` amplitude grid.
pub fn nocsi_per_element_grid_n2(inst: &NoCsiInstance, m: usize) -> f64 {
    assert_eq!(inst.h_ar.len(), 2, "two-element oracle");
    let level = |i: usize| i as f64 / (m - 1) as f64;
    let mut best = 0.0f64;
    for i in 0..m {
        for k in 0..m {
            best = best.max(nocsi_value(inst, &[level(i), level(k)]));
        }
    }
    best
}

/// Smallest Willie gain over `draws` reflect vectors uniform on the unit
/// polydisc.
pub fn brute_force_min_gain(a: &[C64], h_aw: C64, draws: usize, rng: &mut impl Rng) -> f64 {
    let mut v = vec![C64::new(0.0, 0.0); a.len()];
    let mut best = f64::INFINITY;
    for _ in 0..draws {
        v.iter_mut().for_each(|z| *z = disc_point(rng));
        best = best.min(effective(&v, a, h_aw).norm_sqr());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nocsi_value_at_zero_is_direct_path() {
        let inst = NoCsiInstance {
            h_ar: vec![C64::new(1.0, 0.0); 2],
            b: vec![C64::new(1.0, 0.0); 2],
            h_ab: C64::new(2.0, 0.0),
            chi_rw: 1.0,
            chi_aw: 1.0,
            eps_bar: 0.5,
            sigma_w2: 1.0,
            sigma_b2: 1.0,
            p_max: 10.0,
            blocklength: 100,
        };
        assert_eq!(nocsi_value(&inst, &[0.0, 0.0]), 0.5 * 4.0);
        // ρ = 1: δ = 3, p = 1/6, amplitude 4
        assert!((nocsi_value(&inst, &[1.0, 1.0]) - 16.0 / 6.0).abs() < 1e-15);
        assert!(nocsi_per_element_grid_n2(&inst, 11) >= nocsi_common_grid(&inst, 11));
    }
}
