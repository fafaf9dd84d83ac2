//! Self-check report: closed-form oracles, small exhaustive searches and
//! Monte Carlo moments, each reported with its measured residual.

use std::fmt;

use irs_covert::covertness::{
    conservative_kl_radius, epsilon_bar, expected_kl, kl_divergence, kl_radius,
};
use irs_covert::no_csi::no_csi_suite;
use irs_covert::psca::{psca_optimize, solve_relaxed_upper_bound, AmplitudeConstraint};
use irs_covert::scenario::{trial_rng, willie_gain};
use irs_covert::two_stage::{
    conservative_power, perfect_covertness_design, perfect_covertness_feasible, two_stage_optimize,
};
use irs_covert::{CovertnessBudget, Geometry, HermitianMatrix, PscaConfig, SystemParams, TwoStageConfig, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::algorithms::Trial;
use crate::config::ParamsConfig;
use crate::oracles::{self, complex_vec, random_forms};

/// Signature of the stage-2 power rule, injectable so that a deliberately
/// broken rule can be shown to fail the plug-back check.
pub type PowerRule = dyn Fn(&[C64], &HermitianMatrix, &CovertnessBudget, f64, f64) -> f64 + Sync;

/// High-precision values of `(ε, L, t*, ε̄)`.
pub const PINNED: [(f64, u32, f64, f64); 6] = [
    (0.1, 100, 0.020269583048493496, 0.014545115631536171),
    (0.01, 10, 0.006_351_313_615_018_976, 0.004_512_226_969_188_88),
    (0.2, 1000, 0.01275651252990371, 0.009105012168137877),
    (0.05, 100, 0.010067029488755292, 0.007_171_431_088_664_881),
    (0.2, 100, 0.041_090_221_462_965_69, 0.029909212972566882),
    (0.01, 1000, 0.0006327222900822971, 0.000_447_613_685_102_382_9),
];

pub const GRID_EPS: [f64; 4] = [0.01, 0.05, 0.1, 0.2];
pub const GRID_L: [u32; 3] = [10, 100, 1000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Bound {
    /// Pass when `measured ≤ threshold`.
    AtMost,
    /// Pass when `measured ≥ threshold`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub bound: Bound,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    fn push(&mut self, name: impl Into<String>, measured: f64, bound: Bound, threshold: f64) {
        let passed = match bound {
            Bound::AtMost => measured <= threshold,
            Bound::AtLeast => measured >= threshold,
        };
        self.checks.push(Check { name: name.into(), measured, threshold, bound, passed });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let op = if c.bound == Bound::AtMost { "<=" } else { ">=" };
            writeln!(
                f,
                "{} {:<40} {:>12.4e} {op} {:.1e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.threshold
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn budget(eps: f64, l: u32) -> CovertnessBudget {
    CovertnessBudget::new(eps, l).expect("valid budget")
}

/// Reference link budget on an `n_x × n_z` surface.
pub fn reference_params(n_x: usize, n_z: usize, epsilon: f64) -> SystemParams {
    ParamsConfig { n_x, n_z, epsilon, ..Default::default() }.to_params()
}

/// Seeded draw on the reference geometry.
pub fn reference_trial(seed: u64, n_x: usize, n_z: usize, epsilon: f64) -> Trial {
    let params = reference_params(n_x, n_z, epsilon);
    Trial::sample(&Geometry::reference(), &params, &mut trial_rng(seed, 0)).expect("reference draw")
}

/// Full report with the library's power rule.
pub fn validate() -> Report {
    validate_with(&conservative_power::<f64>)
}

pub fn validate_with(power: &PowerRule) -> Report {
    let mut r = Report::default();
    covertness_checks(&mut r);
    scenario_checks(&mut r);
    full_csi_checks(&mut r, power);
    no_csi_checks(&mut r);
    r
}

fn covertness_checks(r: &mut Report) {
    for &(eps, l, t_star, eps_bar) in &PINNED {
        let b = budget(eps, l);
        let t = kl_radius(&b).map_or(f64::INFINITY, |t| rel(t, t_star));
        r.push(format!("t_star(eps={eps}, L={l})"), t, Bound::AtMost, 1e-9);
        let e = epsilon_bar(&b).map_or(f64::INFINITY, |e| rel(e, eps_bar));
        r.push(format!("eps_bar(eps={eps}, L={l})"), e, Bound::AtMost, 1e-8);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let b = budget(rng.random_range(0.01..0.3), rng.random_range(5..2000u32));
        let t = kl_radius(&b).unwrap_or(f64::NAN);
        let sigma2 = 10f64.powf(rng.random_range(-14.0..-8.0));
        let gain = 10f64.powf(rng.random_range(-12.0..-4.0));
        let kl = kl_divergence(t * sigma2 / gain, gain, sigma2, b.blocklength()).unwrap_or(f64::NAN);
        worst = worst.max((kl / b.blocklength() as f64 - b.per_use_cap()).abs());
    }
    r.push("radius_boundary_equivalence", worst, Bound::AtMost, 1e-9);

    let (mut order, mut trip) = (f64::NEG_INFINITY, 0.0f64);
    for &eps in &GRID_EPS {
        for &l in &GRID_L {
            let b = budget(eps, l);
            order = order.max(conservative_kl_radius(&b) - kl_radius(&b).unwrap_or(f64::NAN));
            let d = epsilon_bar(&b).and_then(|e| expected_kl(e, 1.0, 1.0, l)).unwrap_or(f64::NAN);
            trip = trip.max((d - 2.0 * eps * eps).abs());
        }
    }
    r.push("conservative_radius_minus_radius", order, Bound::AtMost, 0.0);
    r.push("expected_kl_round_trip", trip, Bound::AtMost, 1e-8);

    // mean of L·(ln(1+X) − X/(1+X)) for X ~ Exp(mean x̂), in standard errors
    let mut worst_z = 0.0f64;
    for &(x_hat, l) in &[(0.0145, 100u32), (0.3, 10), (2.0, 50)] {
        let exp = Exp::new(1.0 / x_hat).expect("positive rate");
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let d = kl_divergence(exp.sample(&mut rng), 1.0, 1.0, l).unwrap_or(f64::NAN);
            s += d;
            s2 += d * d;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        let want = expected_kl(x_hat, 1.0, 1.0, l).unwrap_or(f64::NAN);
        worst_z = worst_z.max((mean - want).abs() / se);
    }
    r.push("expected_kl_monte_carlo_sigmas", worst_z, Bound::AtMost, 3.0);
}

fn scenario_checks(r: &mut Report) {
    // small-scale power of each link averages to its path gain
    let params = reference_params(2, 2, 0.1);
    let g = Geometry::reference();
    let gains = g.path_gains(params.beta0).expect("reference geometry");
    let (mut rb, mut rw, mut ar, mut aw) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..25_000 {
        let ch = irs_covert::scenario::sample_channels_with(&g, &params, &mut rng).expect("draw");
        rb.extend(ch.h_rb.iter().map(|z| z.norm_sqr()));
        rw.extend(ch.h_rw.iter().map(|z| z.norm_sqr()));
        ar.extend(ch.h_ar.iter().map(|z| z.norm_sqr()));
        aw.push(ch.h_aw.norm_sqr());
    }
    let sigmas = |xs: &[f64], want: f64| {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean - want).abs() / (var / n).sqrt()
    };
    let worst = [
        sigmas(&rb, gains.chi_rb),
        sigmas(&rw, gains.chi_rw),
        sigmas(&ar, gains.chi_ar),
        sigmas(&aw, gains.chi_aw),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    r.push("channel_power_moments_sigmas", worst, Bound::AtMost, 3.0);

    let mut worst = 0.0f64;
    for seed in 0..20 {
        let t = reference_trial(seed, 3, 1, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let v = complex_vec(&mut rng, 3);
        let u: Vec<C64> = v.iter().copied().chain([C64::new(1.0, 0.0)]).collect();
        let ga = oracles::effective(&v, &t.qf.a, t.qf.h_aw).norm_sqr();
        let gb = oracles::effective(&v, &t.qf.b, t.qf.h_ab).norm_sqr();
        worst = worst.max(rel(t.qf.mat_a.quad_form(&u), ga)).max(rel(t.qf.mat_b.quad_form(&u), gb));
    }
    r.push("quadratic_form_identity", worst, Bound::AtMost, 1e-12);
}

fn full_csi_checks(r: &mut Report, power: &PowerRule) {
    let (mut above_ub, mut below_grid) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for seed in 0..4 {
        let t = reference_trial(seed, 2, 1, 0.1);
        let t_star = kl_radius(&t.params.budget().expect("budget")).unwrap_or(f64::NAN);
        let grid = oracles::full_csi_grid_n2(&t.qf, &t.params, t_star, 50);
        let ub = solve_relaxed_upper_bound(&t.qf, &t.params, AmplitudeConstraint::Bounded).unwrap_or(f64::NAN);
        let psca = psca_optimize(&t.qf, &t.params, &PscaConfig::default()).map_or(f64::NAN, |p| p.design.bob_snr);
        above_ub = above_ub.max(grid / ub - 1.0);
        below_grid = below_grid.max(1.0 - psca / grid);
    }
    r.push("grid_over_upper_bound_n2", above_ub, Bound::AtMost, 1e-6);
    r.push("psca_shortfall_vs_grid_n2", below_grid, Bound::AtMost, 0.02);

    let (mut worst_gain, mut worst_kl, mut feasible) = (0.0f64, 0.0f64, 0);
    for seed in 0..40 {
        let t = reference_trial(seed, 4, 1, 0.1);
        if !perfect_covertness_feasible(&t.qf.a, t.qf.h_aw) {
            continue;
        }
        feasible += 1;
        match perfect_covertness_design(&t.qf, &t.params) {
            Ok(d) => {
                let v = d.reflect_vector();
                worst_gain = worst_gain.max(willie_gain(&v, &t.qf.a, t.qf.h_aw) / t.qf.h_aw.norm_sqr());
                worst_kl = worst_kl.max(d.kl_value);
            }
            Err(_) => worst_gain = f64::INFINITY,
        }
    }
    r.push("perfect_covertness_feasible_instances", feasible as f64, Bound::AtLeast, 1.0);
    r.push("perfect_covertness_relative_gain", worst_gain, Bound::AtMost, 1e-18);
    r.push("perfect_covertness_kl", worst_kl, Bound::AtMost, 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut monotone = 0;
    let runs = 100;
    for _ in 0..runs {
        let n = rng.random_range(2..=4);
        let qf = random_forms(&mut rng, n);
        let params = SystemParams { n_x: n, n_z: 1, ..reference_params(1, 1, 0.1) };
        if let Ok(res) = two_stage_optimize(&qf, &params, &TwoStageConfig::default()) {
            if res.ratio_trace.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)) {
                monotone += 1;
            }
        }
    }
    r.push("two_stage_ascent_fraction", monotone as f64 / runs as f64, Bound::AtLeast, 0.95);

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let qf = random_forms(&mut rng, 4);
        let b = budget(rng.random_range(0.01..0.3), rng.random_range(10..1000u32));
        let u: Vec<C64> = (0..5)
            .map(|_| C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
            .collect();
        let sigma = 1e-3;
        let p_max = 1e9;
        let p = power(&u, &qf.mat_a, &b, sigma, p_max);
        let x = p * qf.quad_a(&u) / sigma;
        let c = b.per_use_cap();
        // a power outside [0, p_max] fails however well it fits the equation
        let residual = if (0.0..=p_max).contains(&p) { ((x - x / (1.0 + x)) - c).abs() / c } else { f64::INFINITY };
        worst = worst.max(residual);
    }
    let worst = if worst.is_nan() { f64::INFINITY } else { worst };
    r.push("conservative_power_plug_back", worst, Bound::AtMost, 1e-10);
}

fn no_csi_checks(r: &mut Report) {
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..20 {
        let t = reference_trial(seed, 4, 1, 0.1);
        match no_csi_suite(&t.nocsi) {
            Ok(s) => {
                let slack = |hi: f64, lo: f64| 1.0 - hi / lo;
                worst = worst
                    .max(slack(s.per_element.bob_snr, s.common.bob_snr))
                    .max(slack(s.common.bob_snr, s.unit.bob_snr));
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    r.push("nocsi_ordering_violation", worst, Bound::AtMost, 1e-6);

    let (mut common, mut per) = (0.0f64, 0.0f64);
    for seed in 0..5 {
        let t = reference_trial(seed, 2, 1, 0.1);
        let Ok(s) = no_csi_suite(&t.nocsi) else {
            common = f64::INFINITY;
            continue;
        };
        let gc = oracles::nocsi_common_grid(&t.nocsi, 10_000);
        let gp = oracles::nocsi_per_element_grid_n2(&t.nocsi, 401);
        common = common.max(rel(s.common.bob_snr, gc));
        per = per.max(rel(s.per_element.bob_snr, gp));
    }
    r.push("nocsi_common_vs_grid_n2", common, Bound::AtMost, 5e-3);
    r.push("nocsi_per_element_vs_grid_n2", per, Bound::AtMost, 5e-3);
}
