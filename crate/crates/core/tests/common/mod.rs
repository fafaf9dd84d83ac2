#![allow(dead_code)]

use irs_covert::psca::build_quadratic_forms;
use irs_covert::scenario::{cascade_vectors, sample_channels};
use irs_covert::{ChannelSet, Geometry, QuadraticForms, SystemParams, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Reference link budget with an `n_x × n_z` surface.
pub fn params(n_x: usize, n_z: usize, epsilon: f64) -> SystemParams {
    SystemParams {
        p_max: db(36.0 - 30.0),
        blocklength: 100,
        sigma_b2: db(-80.0 - 30.0),
        sigma_w2: db(-80.0 - 30.0),
        epsilon,
        n_x,
        n_z,
        rician_k: db(5.0),
        beta0: db(-30.0),
    }
}

pub struct Instance {
    pub params: SystemParams,
    pub channels: ChannelSet,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub qf: QuadraticForms,
}

pub fn instance(seed: u64, n_x: usize, n_z: usize, epsilon: f64) -> Instance {
    let params = params(n_x, n_z, epsilon);
    let channels = sample_channels(&Geometry::reference(), &params, seed).unwrap();
    let (a, b) = cascade_vectors(&channels);
    let qf = build_quadratic_forms(&a, &b, channels.h_ab, channels.h_aw).unwrap();
    Instance { params, channels, a, b, qf }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn complex_vec(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_normal(rng)).collect()
}

/// Uniform point of the closed unit disc.
pub fn disc_point(rng: &mut impl Rng) -> C64 {
    let r: f64 = rng.random::<f64>().sqrt();
    C64::from_polar(r, rng.random::<f64>() * std::f64::consts::TAU)
}

/// `Σ conj(v_n)·x_n + h`, written out independently of the library.
pub fn effective(v: &[C64], x: &[C64], h: C64) -> C64 {
    let mut s = h;
    for i in 0..v.len() {
        s += v[i].conj() * x[i];
    }
    s
}

/// Reference KL divergence straight from its definition.
pub fn kl_reference(x: f64, l: u32) -> f64 {
    l as f64 * ((1.0 + x).ln() - x / (1.0 + x))
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Exhaustive search over `N = 2` reflect vectors: `m` amplitudes on `[0, 1]`
/// and `m` phases on `[0, 2π)` per element. For every grid vector the power
/// is the largest covert one, `min(p_max, σ_w²·t*/gain)`, which dominates
/// any discrete power axis. Returns the best Bob SNR.
pub fn grid_optimum_n2(inst: &Instance, t_star: f64, m: usize) -> f64 {
    assert_eq!(inst.a.len(), 2);
    let p = &inst.params;
    let (h_ab, h_aw) = (inst.channels.h_ab, inst.channels.h_aw);
    let levels: Vec<C64> = (0..m)
        .flat_map(|i| {
            let rho = i as f64 / (m - 1) as f64;
            (0..m).map(move |k| C64::from_polar(rho, std::f64::consts::TAU * k as f64 / m as f64))
        })
        .collect();
    let mut best = 0.0f64;
    for &v1 in &levels {
        let (b1, a1) = (v1.conj() * inst.b[0] + h_ab, v1.conj() * inst.a[0] + h_aw);
        for &v2 in &levels {
            let gain = (a1 + v2.conj() * inst.a[1]).norm_sqr();
            let power = if gain > 0.0 { (p.sigma_w2 * t_star / gain).min(p.p_max) } else { p.p_max };
            let snr = power * (b1 + v2.conj() * inst.b[1]).norm_sqr() / p.sigma_b2;
            best = best.max(snr);
        }
    }
    best
}

pub fn nocsi_instance(seed: u64, n_x: usize, n_z: usize, epsilon: f64) -> irs_covert::NoCsiInstance {
    let p = params(n_x, n_z, epsilon);
    let g = Geometry::reference();
    let ch = sample_channels(&g, &p, seed).unwrap();
    irs_covert::NoCsiInstance::from_channels(&ch, &g.path_gains(p.beta0).unwrap(), &p).unwrap()
}
