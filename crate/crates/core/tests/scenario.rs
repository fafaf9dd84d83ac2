mod common;

use common::{complex_vec, disc_point, effective, params, rel, rng};
use irs_covert::scenario::{
    bob_snr, cascade_vectors, path_loss, polar_parts, sample_channels, sample_channels_with, trial_rng, willie_gain,
    wrap_phase,
};
use irs_covert::{ChannelSet, Geometry, ReflectDesign, C64};
use proptest::prelude::*;
use rand::Rng;

/// Sample mean and its standard error.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn second_moments_match_path_loss() {
    let g = Geometry::reference();
    let p = params(1, 1, 0.1);
    let gains = g.path_gains(p.beta0).unwrap();
    let mut r = trial_rng(2024, 0);
    let draws: Vec<ChannelSet> = (0..100_000).map(|_| sample_channels_with(&g, &p, &mut r).unwrap()).collect();
    let check = |name: &str, f: &dyn Fn(&ChannelSet) -> f64, want: f64| {
        let xs: Vec<f64> = draws.iter().map(f).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - want).abs() < 3.0 * se, "{name}: mean {m:e} ± {se:e}, path loss {want:e}");
    };
    check("h_ab", &|c| c.h_ab.norm_sqr(), gains.chi_ab);
    check("h_aw", &|c| c.h_aw.norm_sqr(), gains.chi_aw);
    check("h_rb", &|c| c.h_rb[0].norm_sqr(), gains.chi_rb);
    check("h_rw", &|c| c.h_rw[0].norm_sqr(), gains.chi_rw);
    check("h_ar", &|c| c.h_ar[0].norm_sqr(), gains.chi_ar);
    // Rayleigh links have zero mean
    check("Re h_ab", &|c| c.h_ab.re, 0.0);
    check("Im h_rw", &|c| c.h_rw[0].im, 0.0);
}

#[test]
fn reference_path_gains() {
    let g = Geometry::reference();
    let gains = g.path_gains(1e-3).unwrap();
    let d_ar = (100f64.powi(2) + 25.0).sqrt();
    assert!(rel(gains.chi_ar, 1e-3 * d_ar.powf(-2.4)) < 1e-14);
    assert!(rel(gains.chi_rw, 1e-3 * 125f64.sqrt().powf(-3.0)) < 1e-14);
    assert!(rel(path_loss(1.0, 4.2, 0.5).unwrap(), 0.5) < 1e-15);
}

#[test]
fn zero_rician_factor_ignores_line_of_sight() {
    // With K = 0 the normalized Alice–IRS channel does not depend on the array orientation.
    let mut p = params(3, 2, 0.1);
    p.rician_k = 0.0;
    let g1 = Geometry::reference();
    let g2 = g1.with_irs_x(40.0);
    let (c1, c2) = (sample_channels(&g1, &p, 9).unwrap(), sample_channels(&g2, &p, 9).unwrap());
    let (s1, s2) = (g1.path_gains(p.beta0).unwrap().chi_ar.sqrt(), g2.path_gains(p.beta0).unwrap().chi_ar.sqrt());
    for (x, y) in c1.h_ar.iter().zip(&c2.h_ar) {
        assert!((x / s1 - y / s2).norm() < 1e-12);
    }
}

#[test]
fn strong_line_of_sight_is_a_steering_vector() {
    let mut p = params(5, 2, 0.1);
    p.rician_k = 1e16;
    let g = Geometry::reference();
    let ch = sample_channels(&g, &p, 1).unwrap();
    let chi = g.path_gains(p.beta0).unwrap().chi_ar;
    let d = g.irs.distance(&g.alice);
    let (ux, uz) = ((g.alice.x - g.irs.x) / d, (g.alice.z - g.irs.z) / d);
    for (n, h) in ch.h_ar.iter().enumerate() {
        let (ix, iz) = ((n % 5) as f64, (n / 5) as f64);
        let want = C64::from_polar(chi.sqrt(), std::f64::consts::PI * (ix * ux + iz * uz));
        assert!((h - want).norm() < 1e-6 * chi.sqrt());
    }
}

#[test]
fn cascade_equals_diagonal_reflection() {
    let mut r = rng(4);
    for n in [1usize, 3, 8] {
        let ch = ChannelSet {
            h_ar: complex_vec(&mut r, n),
            h_rb: complex_vec(&mut r, n),
            h_rw: complex_vec(&mut r, n),
            h_ab: common::complex_normal(&mut r),
            h_aw: common::complex_normal(&mut r),
        };
        let (a, b) = cascade_vectors(&ch);
        let v: Vec<C64> = (0..n).map(|_| disc_point(&mut r)).collect();
        // h_rwᴴ·diag(conj v)·h_ar + h_aw, via explicit matrix-vector products
        let mut theta_h = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                let diag = if i == j { v[i].conj() } else { C64::new(0.0, 0.0) };
                theta_h[i] += diag * ch.h_ar[j];
            }
        }
        let willie: C64 = ch.h_rw.iter().zip(&theta_h).map(|(w, t)| w.conj() * t).sum::<C64>() + ch.h_aw;
        let bob: C64 = ch.h_rb.iter().zip(&theta_h).map(|(w, t)| w.conj() * t).sum::<C64>() + ch.h_ab;
        assert!((willie_gain(&v, &a, ch.h_aw) - willie.norm_sqr()).abs() < 1e-12 * (1.0 + willie.norm_sqr()));
        let snr = bob_snr(2.0, &v, &b, ch.h_ab, 0.5);
        assert!(rel(snr, 4.0 * bob.norm_sqr()) < 1e-12);
    }
    // identity reflection channel
    let x = complex_vec(&mut r, 4);
    let ch = ChannelSet {
        h_ar: x.clone(),
        h_rb: x.clone(),
        h_rw: vec![C64::new(1.0, 0.0); 4],
        h_ab: C64::new(0.0, 0.0),
        h_aw: C64::new(0.0, 0.0),
    };
    assert_eq!(cascade_vectors(&ch).0, x);
}

#[test]
fn design_report_matches_polar_form() {
    let inst = common::instance(5, 5, 2, 0.1);
    let mut r = rng(6);
    let v: Vec<C64> = (0..10).map(|_| disc_point(&mut r)).collect();
    let d = ReflectDesign::from_vector(0.7, &v, &inst.a, &inst.b, inst.channels.h_ab, inst.channels.h_aw, &inst.params).unwrap();
    // |Σ ρ_n e^{jθ_n} b_n + h_ab|²
    let sum: C64 = d
        .rho
        .iter()
        .zip(&d.theta)
        .zip(&inst.b)
        .map(|((&rho, &th), &bn)| C64::from_polar(rho, th) * bn)
        .sum::<C64>()
        + inst.channels.h_ab;
    assert!(rel(d.bob_snr, 0.7 * sum.norm_sqr() / inst.params.sigma_b2) < 1e-12);
    assert!(rel(d.willie_gain, effective(&v, &inst.a, inst.channels.h_aw).norm_sqr()) < 1e-12);
    let x = 0.7 * d.willie_gain / inst.params.sigma_w2;
    assert!(rel(d.kl_value, common::kl_reference(x, 100)) < 1e-9);
    for (z, w) in d.reflect_vector().iter().zip(&v) {
        assert!((z - w).norm() < 1e-14);
    }
}

#[test]
fn trial_streams_are_distinct() {
    let mut a = trial_rng(1, 0);
    let mut b = trial_rng(1, 1);
    let xa: u64 = a.random();
    let xb: u64 = b.random();
    assert_ne!(xa, xb);
    let mut c = trial_rng(1, 1);
    assert_eq!(xb, c.random::<u64>());
}

#[test]
fn invalid_params_rejected() {
    let g = Geometry::reference();
    let mut p = params(1, 1, 0.1);
    p.p_max = 0.0;
    assert!(sample_channels(&g, &p, 0).is_err());
    let mut p = params(1, 1, 0.1);
    p.n_z = 0;
    assert!(sample_channels(&g, &p, 0).is_err());
    let mut p = params(1, 1, 0.1);
    p.epsilon = 2.0;
    assert!(sample_channels(&g, &p, 0).is_err());
}

proptest! {
    #[test]
    fn polar_parts_round_trip(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let v = [C64::new(re, im)];
        let (rho, theta) = polar_parts(&v);
        prop_assert!((0.0..std::f64::consts::TAU).contains(&theta[0]));
        prop_assert!((C64::from_polar(rho[0], -theta[0]) - v[0]).norm() < 1e-12);
    }

    #[test]
    fn wrap_phase_in_range(t in -100.0f64..100.0) {
        let w = wrap_phase(t);
        prop_assert!((0.0..std::f64::consts::TAU).contains(&w));
        prop_assert!((C64::from_polar(1.0, w) - C64::from_polar(1.0, t)).norm() < 1e-12);
    }

    #[test]
    fn snr_scales_linearly_in_power(p in 1e-4f64..10.0, seed in 0u64..1000) {
        let mut r = rng(seed);
        let b = complex_vec(&mut r, 3);
        let v: Vec<C64> = (0..3).map(|_| disc_point(&mut r)).collect();
        let h = common::complex_normal(&mut r);
        prop_assert!(rel(bob_snr(p, &v, &b, h, 1.0), p * bob_snr(1.0, &v, &b, h, 1.0)) < 1e-13);
    }
}
