mod common;

use common::{complex_vec, disc_point, effective, grid_optimum_n2, instance, kl_reference, rel, rng};
use irs_covert::covertness::{conservative_kl_radius, kl_radius};
use irs_covert::numerics::max_eigpair;
use irs_covert::psca::{
    build_quadratic_forms, extract_rank_one, initial_feasible_point, psca_optimize, solve_relaxed_upper_bound,
    AmplitudeConstraint, PscaStatus, Subproblem,
};
use irs_covert::scenario::bob_snr;
use irs_covert::two_stage::{perfect_covertness_design, perfect_covertness_feasible};
use irs_covert::{HermitianMatrix, PscaConfig, C64};
use nalgebra::DMatrix;

#[test]
fn quadratic_forms_reproduce_link_gains() {
    let mut r = rng(1);
    for _ in 0..100 {
        let n = 1 + r_usize(&mut r, 7);
        let (a, b) = (complex_vec(&mut r, n), complex_vec(&mut r, n));
        let (h_ab, h_aw) = (common::complex_normal(&mut r), common::complex_normal(&mut r));
        let qf = build_quadratic_forms(&a, &b, h_ab, h_aw).unwrap();
        let v = complex_vec(&mut r, n);
        let u: Vec<C64> = v.iter().copied().chain([C64::new(1.0, 0.0)]).collect();
        assert!(rel(qf.quad_b(&u), effective(&v, &b, h_ab).norm_sqr()) < 1e-12);
        assert!(rel(qf.quad_a(&u), effective(&v, &a, h_aw).norm_sqr()) < 1e-12);
        let a_norm: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>() + h_aw.norm_sqr();
        assert!(rel(qf.lambda_max_a(), a_norm) < 1e-12);
        assert!(rel(max_eigpair(&qf.mat_a).value, a_norm) < 1e-9);
        // rank one: trace equals the top eigenvalue
        assert!(rel(qf.mat_b.trace(), qf.lambda_max_b()) < 1e-12);
    }
}

fn r_usize(r: &mut impl rand::Rng, n: usize) -> usize {
    r.random_range(0..n)
}

#[test]
fn scalar_forms_example() {
    let one = C64::new(1.0, 0.0);
    let qf = build_quadratic_forms(&[one], &[one], one, one).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(qf.mat_b.get(i, j), one);
        }
    }
}

#[test]
fn zero_radius_still_reaches_bob_when_cancellation_possible() {
    // N = 1 with |a| ≥ |h_aw|: the surface can null Willie, so t* = 0 leaves a positive objective.
    let qf = build_quadratic_forms(
        &[C64::new(2.0, 1.0)],
        &[C64::new(0.5, -1.0)],
        C64::new(0.3, 0.2),
        C64::new(-1.0, 0.5),
    )
    .unwrap();
    assert!(perfect_covertness_feasible(&qf.a, qf.h_aw));
    let sub = Subproblem::new(&qf, 0.0, 1.0, 1.0, AmplitudeConstraint::Bounded).unwrap();
    let sol = sub.solve(None, 0.0).unwrap();
    assert!(sol.objective > 1e-3, "objective {}", sol.objective);
    assert!(sol.w.trace_product(&qf.mat_a) < 1e-7 * sol.w.trace());
    // the closed-form nulling design is one feasible point of the relaxation
    let mut params = instance(0, 1, 1, 0.1).params;
    (params.epsilon, params.p_max, params.sigma_b2, params.sigma_w2) = (0.0, 1.0, 1.0, 1.0);
    let pc = perfect_covertness_design(&qf, &params).unwrap();
    assert!(sol.objective >= pc.bob_snr * (1.0 - 1e-7));

    let res = psca_optimize(&qf, &params, &PscaConfig::default()).unwrap();
    assert!(res.design.kl_value < 1e-12);
    assert!(res.design.bob_snr >= pc.bob_snr * (1.0 - 1e-6));
}

#[test]
fn relaxation_dominates_rank_one_points() {
    for seed in 0..5 {
        let inst = instance(seed, 2, 2, 0.1);
        let t_star = kl_radius(&inst.params.budget().unwrap()).unwrap();
        let ub = solve_relaxed_upper_bound(&inst.qf, &inst.params, AmplitudeConstraint::Bounded).unwrap();
        let mut r = rng(100 + seed);
        for _ in 0..2000 {
            let v: Vec<C64> = (0..4).map(|_| disc_point(&mut r)).collect();
            let gain = effective(&v, &inst.a, inst.channels.h_aw).norm_sqr();
            let p = (inst.params.sigma_w2 * t_star / gain).min(inst.params.p_max);
            let snr = p * effective(&v, &inst.b, inst.channels.h_ab).norm_sqr() / inst.params.sigma_b2;
            assert!(snr <= ub * (1.0 + 1e-6), "rank-one point {snr} above relaxation {ub}");
        }
    }
}

#[test]
fn subproblem_solution_is_feasible() {
    let inst = instance(3, 5, 1, 0.1);
    let p = &inst.params;
    let t_star = kl_radius(&p.budget().unwrap()).unwrap();
    let (w0, _) = initial_feasible_point(&inst.qf, &p.budget().unwrap(), p.sigma_w2, p.p_max);
    let tau = 1e-3 * inst.qf.lambda_max_b();
    for amp in [AmplitudeConstraint::Bounded, AmplitudeConstraint::Unit] {
        let sub = Subproblem::new(&inst.qf, t_star, p.p_max, p.sigma_w2, amp).unwrap();
        let sol = sub.solve(Some(&w0), tau).unwrap();
        let w = &sol.w;
        let tol = 1e-7;
        let pa = sol.p_a;
        assert!(pa <= p.p_max * (1.0 + tol));
        for k in 0..5 {
            let d = w.get(k, k).re;
            match amp {
                AmplitudeConstraint::Bounded => assert!(d <= pa + tol * p.p_max),
                AmplitudeConstraint::Unit => assert!((d - pa).abs() <= tol * p.p_max),
            }
        }
        let cov = w.trace_product(&inst.qf.mat_a);
        assert!(cov <= p.sigma_w2 * t_star * (1.0 + 1e-6));
        let min_eig = nalgebra_min_eig(w);
        assert!(min_eig >= -tol * w.trace());
        // warm start can only be improved upon
        let warm = w0.trace_product(&inst.qf.mat_b);
        assert!(sol.objective >= warm * (1.0 - 1e-6));
        assert!(sol.eta >= 0.0);
    }
}

fn nalgebra_min_eig(w: &HermitianMatrix) -> f64 {
    let n = w.order();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let z = w.get(i, j);
        nalgebra::Complex::new(z.re, z.im)
    });
    m.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[test]
fn initial_point_is_feasible_rank_one() {
    for seed in 0..10 {
        let inst = instance(seed, 5, 2, 0.1);
        let p = &inst.params;
        let budget = p.budget().unwrap();
        let (w0, p0) = initial_feasible_point(&inst.qf, &budget, p.sigma_w2, p.p_max);
        assert!(p0 <= p.p_max && p0 > 0.0);
        assert!(w0.trace_product(&inst.qf.mat_a) <= p.sigma_w2 * kl_radius(&budget).unwrap());
        assert!(w0.trace() - max_eigpair(&w0).value < 1e-12 * w0.trace());
        if p0 < p.p_max {
            assert!(rel(w0.trace_product(&inst.qf.mat_a), p.sigma_w2 * conservative_kl_radius(&budget)) < 1e-10);
        }
    }
}

#[test]
fn extraction_recovers_exact_rank_one() {
    let mut r = rng(8);
    for _ in 0..20 {
        let v: Vec<C64> = (0..6).map(|_| disc_point(&mut r)).collect();
        let p = 0.3;
        let u: Vec<C64> = v.iter().copied().chain([C64::new(1.0, 0.0)]).collect();
        let w = HermitianMatrix::outer(&u, p);
        let (got, residual) = extract_rank_one(&w, p);
        assert!(residual.abs() < 1e-12);
        for (g, want) in got.iter().zip(&v) {
            assert!((g - want).norm() < 1e-10);
        }
    }
}

#[test]
fn extraction_residual_matches_dense_oracle() {
    let mut r = rng(9);
    for _ in 0..20 {
        // random PSD: G·Gᴴ
        let g = complex_vec(&mut r, 16);
        let w = HermitianMatrix::from_fn(4, |i, j| (0..4).map(|k| g[i * 4 + k] * g[j * 4 + k].conj()).sum());
        let n = w.order();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let z = w.get(i, j);
            nalgebra::Complex::new(z.re, z.im)
        });
        let top = m.symmetric_eigen().eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (_, residual) = extract_rank_one(&w, w.get(3, 3).re);
        assert!((residual - (w.trace() - top)).abs() < 1e-9 * w.trace());
    }
}

#[test]
fn psca_is_covert_feasible_and_below_relaxation() {
    for seed in 0..4 {
        let inst = instance(seed, 5, 2, 0.1);
        let p = &inst.params;
        let res = psca_optimize(&inst.qf, p, &PscaConfig::default()).unwrap();
        let ub = solve_relaxed_upper_bound(&inst.qf, p, AmplitudeConstraint::Bounded).unwrap();
        let d = &res.design;
        assert!(d.bob_snr <= ub * (1.0 + 1e-6));
        assert!(d.p_a <= p.p_max);
        assert!(d.rho.iter().all(|&r| r <= 1.0 + 1e-9));
        let v = d.reflect_vector();
        let x = d.p_a * effective(&v, &inst.a, inst.channels.h_aw).norm_sqr() / p.sigma_w2;
        assert!(kl_reference(x, p.blocklength) <= 0.02 * (1.0 + 1e-6));
        assert!(rel(d.bob_snr, bob_snr(d.p_a, &v, &inst.b, inst.channels.h_ab, p.sigma_b2)) < 1e-12);
        assert!(res.eta_final >= 0.0 && res.rank_residual >= -1e-9);
        assert_eq!(res.status, PscaStatus::Converged);
        assert!(res.eta_final < 1e-8 * res.w_final.trace());
        assert!(res.rank_residual < 1e-6 * res.w_final.trace());
    }
}

#[test]
fn psca_unit_amplitude_keeps_unit_modulus() {
    let inst = instance(2, 5, 1, 0.1);
    let cfg = PscaConfig {
        amplitude: AmplitudeConstraint::Unit,
        ..PscaConfig::default()
    };
    let res = psca_optimize(&inst.qf, &inst.params, &cfg).unwrap();
    assert!(res.design.rho.iter().all(|r| (r - 1.0).abs() < 1e-12));
    let bounded = psca_optimize(&inst.qf, &inst.params, &PscaConfig::default()).unwrap();
    assert!(res.design.bob_snr <= bounded.design.bob_snr * (1.0 + 1e-4));
}

#[test]
fn psca_brackets_grid_oracle_at_two_elements() {
    for seed in 0..5 {
        let inst = instance(seed, 2, 1, 0.1);
        let t_star = kl_radius(&inst.params.budget().unwrap()).unwrap();
        let grid = grid_optimum_n2(&inst, t_star, 50);
        let ub = solve_relaxed_upper_bound(&inst.qf, &inst.params, AmplitudeConstraint::Bounded).unwrap();
        let res = psca_optimize(&inst.qf, &inst.params, &PscaConfig::default()).unwrap();
        assert!(grid <= ub * (1.0 + 1e-6), "seed {seed}: grid {grid} above bound {ub}");
        assert!(res.design.bob_snr >= 0.98 * grid, "seed {seed}: psca {} vs grid {grid}", res.design.bob_snr);
    }
}

#[test]
fn psca_matches_perfect_covertness_at_tight_budget() {
    let mut checked = 0;
    for seed in 0..40 {
        let inst = instance(seed, 5, 2, 1e-3);
        if !perfect_covertness_feasible(&inst.a, inst.channels.h_aw) {
            continue;
        }
        let pc = perfect_covertness_design(&inst.qf, &inst.params).unwrap();
        let res = psca_optimize(&inst.qf, &inst.params, &PscaConfig::default()).unwrap();
        assert!(res.design.bob_snr >= 0.99 * pc.bob_snr, "seed {seed}: {} vs {}", res.design.bob_snr, pc.bob_snr);
        checked += 1;
        if checked == 5 {
            break;
        }
    }
    assert!(checked > 0, "no perfect-covertness-feasible instance found");
}

#[test]
fn no_path_to_bob_gives_zero_design() {
    let z = C64::new(0.0, 0.0);
    let qf = build_quadratic_forms(&[C64::new(1.0, 0.0)], &[z], z, C64::new(1.0, 0.0)).unwrap();
    let inst = instance(0, 1, 1, 0.1);
    let res = psca_optimize(&qf, &inst.params, &PscaConfig::default()).unwrap();
    assert_eq!(res.status, PscaStatus::Converged);
    assert_eq!(res.design.bob_snr, 0.0);
}
