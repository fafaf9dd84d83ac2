//! The algorithms are generic over the scalar; single precision must agree
//! with double precision to its own resolution.

use irs_covert::covertness::{epsilon_bar, kl_radius, CovertnessBudget};
use irs_covert::no_csi::{no_csi_suite, NoCsiInstance};
use irs_covert::psca::{build_quadratic_forms, psca_optimize, PscaConfig};
use irs_covert::scenario::{cascade_vectors, sample_channels, Geometry, SystemParams};
use irs_covert::two_stage::{two_stage_optimize, TwoStageConfig};

fn params<T: irs_covert::Real>() -> SystemParams<T> {
    // normalized units keep single precision away from underflow
    SystemParams {
        p_max: T::lit(4.0),
        blocklength: 100,
        sigma_b2: T::lit(1.0),
        sigma_w2: T::lit(1.0),
        epsilon: T::lit(0.1),
        n_x: 3,
        n_z: 1,
        rician_k: T::lit(3.0),
        beta0: T::lit(1.0),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn radii_agree_across_precisions() {
    let b32 = CovertnessBudget::<f32>::new(0.1, 100).unwrap();
    let b64 = CovertnessBudget::<f64>::new(0.1, 100).unwrap();
    assert!(rel(kl_radius(&b32).unwrap() as f64, kl_radius(&b64).unwrap()) < 1e-5);
    // the kernel minus one is about 1/u² at u = 1/ε̄ ≈ 69, so single precision
    // keeps only ulp·u² ≈ 3e−4 of it
    assert!(rel(epsilon_bar(&b32).unwrap() as f64, epsilon_bar(&b64).unwrap()) < 2e-3);
}

#[test]
fn designs_agree_across_precisions() {
    let g32 = Geometry::<f32>::reference();
    let g64 = Geometry::<f64>::reference();
    let (p32, p64) = (params::<f32>(), params::<f64>());
    let c32 = sample_channels(&g32, &p32, 3).unwrap();
    let c64 = sample_channels(&g64, &p64, 3).unwrap();
    // same draws, rounded
    assert!(rel(c32.h_ab.norm() as f64, c64.h_ab.norm()) < 1e-6);

    let (a32, b32) = cascade_vectors(&c32);
    let (a64, b64) = cascade_vectors(&c64);
    let q32 = build_quadratic_forms(&a32, &b32, c32.h_ab, c32.h_aw).unwrap();
    let q64 = build_quadratic_forms(&a64, &b64, c64.h_ab, c64.h_aw).unwrap();

    let t32 = two_stage_optimize(&q32, &p32, &TwoStageConfig::default()).unwrap();
    let t64 = two_stage_optimize(&q64, &p64, &TwoStageConfig::default()).unwrap();
    assert!(rel(t32.design.bob_snr as f64, t64.design.bob_snr) < 1e-3);

    let s32 = psca_optimize(&q32, &p32, &PscaConfig::default()).unwrap();
    let s64 = psca_optimize(&q64, &p64, &PscaConfig::default()).unwrap();
    assert!(rel(s32.design.bob_snr as f64, s64.design.bob_snr) < 1e-2);

    let n32 = NoCsiInstance::from_channels(&c32, &g32.path_gains(p32.beta0).unwrap(), &p32).unwrap();
    let n64 = NoCsiInstance::from_channels(&c64, &g64.path_gains(p64.beta0).unwrap(), &p64).unwrap();
    let (s32, s64) = (no_csi_suite(&n32).unwrap(), no_csi_suite(&n64).unwrap());
    assert!(rel(s32.per_element.bob_snr as f64, s64.per_element.bob_snr) < 1e-3);
}
