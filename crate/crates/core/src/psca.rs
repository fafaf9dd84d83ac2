//! Joint transmit-power and reflection design with full CSI, by penalized
//! successive convex approximation on the semidefinite relaxation.
//!
//! The variable is `W = p_a·u·uᴴ` with `u = [v; 1]`. Rank one is enforced
//! softly: `Tr(W) − w̃ᴴWw̃ ≤ η` with `w̃` the dominant eigenvector of the
//! previous iterate, and `τ·η` is subtracted from the objective with `τ`
//! growing geometrically.

use crate::covertness::{kl_radius, CovertnessBudget};
use crate::error::{ensure_len, Error, Result};
use crate::numerics::dense::RealMatrix;
use crate::numerics::sdp::{solve_sdp, ConstraintMatrix, SdpConstraint, SdpProblem, SdpSettings, SdpStatus};
use crate::numerics::{cdot, hermitian_from_embedding, hermitian_real_embedding, max_eigpair, HermitianMatrix};
use crate::scalar::{Complex, Real};
use crate::scenario::{ReflectDesign, SystemParams};
use crate::two_stage::{bob_aligned_vector, conservative_power};

/// `A = ā·āᴴ` and `B = b̄·b̄ᴴ` with `ā = [a; h_aw]`, `b̄ = [b; h_ab]`, so that
/// `uᴴAu = |vᴴa + h_aw|²` and `uᴴBu = |vᴴb + h_ab|²` for `u = [v; 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForms<T> {
    pub a: Vec<Complex<T>>,
    pub b: Vec<Complex<T>>,
    pub h_ab: Complex<T>,
    pub h_aw: Complex<T>,
    pub a_bar: Vec<Complex<T>>,
    pub b_bar: Vec<Complex<T>>,
    pub mat_a: HermitianMatrix<T>,
    pub mat_b: HermitianMatrix<T>,
}

pub fn build_quadratic_forms<T: Real>(
    a: &[Complex<T>],
    b: &[Complex<T>],
    h_ab: Complex<T>,
    h_aw: Complex<T>,
) -> Result<QuadraticForms<T>> {
    ensure_len(a.len(), b.len())?;
    let a_bar: Vec<_> = a.iter().copied().chain([h_aw]).collect();
    let b_bar: Vec<_> = b.iter().copied().chain([h_ab]).collect();
    Ok(QuadraticForms {
        a: a.to_vec(),
        b: b.to_vec(),
        h_ab,
        h_aw,
        mat_a: HermitianMatrix::outer(&a_bar, T::one()),
        mat_b: HermitianMatrix::outer(&b_bar, T::one()),
        a_bar,
        b_bar,
    })
}

fn inner<T: Real>(u: &[Complex<T>], x: &[Complex<T>]) -> Complex<T> {
    u.iter().zip(x).fold(Complex::new(T::zero(), T::zero()), |s, (p, q)| s + p.conj() * q)
}

impl<T: Real> QuadraticForms<T> {
    pub fn n_elements(&self) -> usize {
        self.a.len()
    }

    /// `uᴴAu = |āᴴu|²`, with a compensated inner product.
    pub fn quad_a(&self, u: &[Complex<T>]) -> T {
        cdot(u, &self.a_bar).norm_sqr()
    }

    /// `uᴴBu = |b̄ᴴu|²`, with a compensated inner product.
    pub fn quad_b(&self, u: &[Complex<T>]) -> T {
        cdot(u, &self.b_bar).norm_sqr()
    }

    /// `λmax(A) = ‖ā‖²`
    pub fn lambda_max_a(&self) -> T {
        self.a_bar.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn lambda_max_b(&self) -> T {
        self.b_bar.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Which amplitude constraint the reflect vector obeys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeConstraint {
    /// `|v_n| ≤ 1`
    #[default]
    Bounded,
    /// `|v_n| = 1`
    Unit,
}

/// Penalty schedule and stopping rule.
///
/// `tau0` and `tau_max` are relative to the warm-start objective
/// `Tr(B·W₀)/(‖b̄‖²·p_max)`, which keeps them meaningful across channel scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PscaConfig<T> {
    pub tau0: T,
    pub c: T,
    pub tau_max: T,
    /// Stop once `η < eta_tol·Tr(W)`.
    pub eta_tol: T,
    /// Relative change of the penalized objective between iterates.
    pub obj_tol: T,
    pub max_outer: usize,
    pub amplitude: AmplitudeConstraint,
}

impl<T: Real> Default for PscaConfig<T> {
    fn default() -> Self {
        Self {
            tau0: T::lit(1e-3),
            c: T::lit(5.0),
            tau_max: T::lit(1e3),
            eta_tol: T::lit(1e-8),
            obj_tol: T::lit(1e-6),
            max_outer: 50,
            amplitude: AmplitudeConstraint::Bounded,
        }
    }
}

impl<T: Real> PscaConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tau0 > T::zero()
            && self.tau0 <= self.tau_max
            && self.c > T::one()
            && self.eta_tol > T::zero()
            && self.obj_tol > T::zero()
            && self.max_outer > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid PSCA configuration {self:?}")))
        }
    }
}

/// Solution of one penalized subproblem, in physical units.
#[derive(Debug, Clone)]
pub struct SubproblemSolution<T> {
    pub w: HermitianMatrix<T>,
    /// `W_{N+1,N+1}`
    pub p_a: T,
    pub eta: T,
    /// `Tr(BW) − τη`
    pub objective: T,
    pub sdp_status: SdpStatus,
}

/// Data of the subproblem family for one channel realization.
///
/// Internally everything is rescaled: `W' = W/p_max`, `B̂ = B/‖b̄‖²`,
/// `Â = A/‖ā‖²`, which puts all coefficients at order one.
#[derive(Debug, Clone)]
pub struct Subproblem<T> {
    n1: usize,
    b_scale: T,
    p_max: T,
    amplitude: AmplitudeConstraint,
    /// `−emb(B̂)/2`
    cost: RealMatrix<T>,
    /// `(emb(Â)/2, r_cov)`, absent when `A = 0` or when the radius is zero.
    covertness: Option<(RealMatrix<T>, T)>,
    /// With a zero radius `Tr(AW) = 0` forces `Wā = 0`; the problem is then
    /// posed on `W = P·Y·Pᴴ` with `P` an orthonormal basis of `ā⊥`, which
    /// restores a strictly feasible interior.
    face: Option<Face<T>>,
    settings: SdpSettings<T>,
}

/// Orthonormal basis of the complement of one vector, stored by columns.
#[derive(Debug, Clone)]
struct Face<T> {
    cols: Vec<Vec<Complex<T>>>,
}

impl<T: Real> Face<T> {
    fn complement_of(x: &[Complex<T>]) -> Self {
        let n = x.len();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        let q: Vec<_> = x.iter().map(|&z| z / norm).collect();
        let pivot = (0..n).fold(0, |best, k| if q[k].norm() > q[best].norm() { k } else { best });
        let mut cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(n - 1);
        for k in (0..n).filter(|&k| k != pivot) {
            let mut v = vec![Complex::new(T::zero(), T::zero()); n];
            v[k] = Complex::new(T::one(), T::zero());
            // two Gram–Schmidt passes against q and the columns so far
            for _ in 0..2 {
                for basis in std::iter::once(&q).chain(cols.iter()) {
                    let c = inner(basis, &v);
                    for (vi, bi) in v.iter_mut().zip(basis) {
                        *vi = *vi - *bi * c;
                    }
                }
            }
            let len = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            cols.push(v.into_iter().map(|z| z / len).collect());
        }
        Self { cols }
    }

    fn dim(&self) -> usize {
        self.cols.len()
    }

    /// `Pᴴx`
    fn project(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.cols.iter().map(|c| inner(c, x)).collect()
    }

    /// `Pᴴe_k`
    fn unit(&self, k: usize) -> Vec<Complex<T>> {
        self.cols.iter().map(|c| c[k].conj()).collect()
    }

    /// `P·Y·Pᴴ`
    fn lift(&self, y: &HermitianMatrix<T>) -> HermitianMatrix<T> {
        let n = self.cols[0].len();
        let m = self.dim();
        // rows of P·Y
        let py: Vec<Vec<Complex<T>>> = (0..n)
            .map(|i| {
                (0..m)
                    .map(|l| (0..m).fold(Complex::new(T::zero(), T::zero()), |s, k| s + self.cols[k][i] * y.get(k, l)))
                    .collect()
            })
            .collect();
        HermitianMatrix::from_fn(n, |i, j| {
            (0..m).fold(Complex::new(T::zero(), T::zero()), |s, l| s + py[i][l] * self.cols[l][j].conj())
        })
    }
}

impl<T: Real> Subproblem<T> {
    /// `t_star` is the per-use SNR radius at Willie; the covertness constraint
    /// becomes `Tr(AW) ≤ σ_w²·t*`.
    pub fn new(qf: &QuadraticForms<T>, t_star: T, p_max: T, sigma_w2: T, amplitude: AmplitudeConstraint) -> Result<Self> {
        if !(p_max > T::zero() && sigma_w2 > T::zero() && t_star >= T::zero()) {
            return Err(Error::InvalidParameter("subproblem needs p_max, sigma_w2 > 0 and t* >= 0".into()));
        }
        let n1 = qf.n_elements() + 1;
        let b_scale = qf.lambda_max_b();
        let a_scale = qf.lambda_max_a();
        let half = T::lit(0.5);
        let face = (a_scale > T::zero() && t_star == T::zero()).then(|| Face::complement_of(&qf.a_bar));
        let cost = match (&face, b_scale > T::zero()) {
            (_, false) => RealMatrix::zeros(2 * face.as_ref().map_or(n1, Face::dim)),
            (None, true) => hermitian_real_embedding(&qf.mat_b).scaled(-half / b_scale),
            (Some(f), true) => hermitian_real_embedding(&HermitianMatrix::outer(&f.project(&qf.b_bar), T::one()))
                .scaled(-half / b_scale),
        };
        let covertness = (a_scale > T::zero() && face.is_none()).then(|| {
            (
                hermitian_real_embedding(&qf.mat_a).scaled(half / a_scale),
                sigma_w2 * t_star / (p_max * a_scale),
            )
        });
        Ok(Self {
            n1,
            b_scale,
            p_max,
            amplitude,
            cost,
            covertness,
            face,
            settings: SdpSettings::default(),
        })
    }

    /// Maximizes `Tr(BW) − τη` over the constraint set. `w_tilde = None`
    /// drops the rank cut (and `η`), giving the plain relaxation.
    pub fn solve(&self, w_tilde: Option<&HermitianMatrix<T>>, tau: T) -> Result<SubproblemSolution<T>> {
        let n1 = self.n1;
        let last = n1 - 1;
        let half = T::lit(0.5);
        // Σ s_k·E_kk, restricted to the face when there is one
        let diagonal = |terms: &[(usize, T)]| match &self.face {
            None => ConstraintMatrix::sparse_symmetric(
                terms
                    .iter()
                    .flat_map(|&(k, s)| [(k, k, s * half), (k + n1, k + n1, s * half)]),
            ),
            Some(f) => {
                let h = terms.iter().fold(HermitianMatrix::zeros(f.dim()), |h, &(k, s)| {
                    h.add(&HermitianMatrix::outer(&f.unit(k), s))
                });
                ConstraintMatrix::Dense(hermitian_real_embedding(&h).scaled(half))
            }
        };

        let mut lp_cost = Vec::new();
        let mut new_lp = |cost: T| {
            lp_cost.push(cost);
            lp_cost.len() - 1
        };
        let eta_idx = w_tilde.map(|_| new_lp(tau / self.b_scale.max(T::min_positive_value())));
        let mut constraints = Vec::new();

        if let Some((a_hat, r_cov)) = &self.covertness {
            constraints.push(SdpConstraint {
                psd: ConstraintMatrix::Dense(a_hat.clone()),
                lp: vec![(new_lp(T::zero()), T::one())],
                rhs: *r_cov,
            });
        }
        constraints.push(SdpConstraint {
            psd: diagonal(&[(last, T::one())]),
            lp: vec![(new_lp(T::zero()), T::one())],
            rhs: T::one(),
        });
        for k in 0..last {
            let lp = match self.amplitude {
                AmplitudeConstraint::Bounded => vec![(new_lp(T::zero()), T::one())],
                AmplitudeConstraint::Unit => vec![],
            };
            constraints.push(SdpConstraint {
                psd: diagonal(&[(k, T::one()), (last, -T::one())]),
                lp,
                rhs: T::zero(),
            });
        }
        if let (Some(w_tilde), Some(eta_idx)) = (w_tilde, eta_idx) {
            let dir = max_eigpair(w_tilde).vector;
            let proj = match &self.face {
                None => HermitianMatrix::identity(n1).sub(&HermitianMatrix::outer(&dir, T::one())),
                Some(f) => HermitianMatrix::identity(f.dim()).sub(&HermitianMatrix::outer(&f.project(&dir), T::one())),
            };
            constraints.push(SdpConstraint {
                psd: ConstraintMatrix::Dense(hermitian_real_embedding(&proj).scaled(half)),
                lp: vec![(eta_idx, -T::one()), (new_lp(T::zero()), T::one())],
                rhs: T::zero(),
            });
        }

        let problem = SdpProblem {
            cost_psd: self.cost.clone(),
            cost_lp: lp_cost,
            constraints,
        };
        let sol = solve_sdp(&problem, &self.settings)?;
        let loose = T::lit(1e-7);
        if sol.status != SdpStatus::Optimal
            && (sol.primal_infeasibility > loose || sol.dual_infeasibility > loose || sol.relative_gap > loose)
        {
            return Err(Error::Solver(format!(
                "interior point stopped after {} iterations (primal {:e}, dual {:e}, gap {:e})",
                sol.iterations,
                sol.primal_infeasibility.as_f64(),
                sol.dual_infeasibility.as_f64(),
                sol.relative_gap.as_f64()
            )));
        }

        let y = hermitian_from_embedding(&sol.x);
        let w = match &self.face {
            None => y,
            Some(f) => f.lift(&y),
        }
        .scaled(self.p_max);
        let eta = eta_idx.map_or(T::zero(), |i| sol.x_lp[i].max(T::zero()) * self.p_max);
        let tr_bw = -self.cost.inner(&sol.x) * self.b_scale * self.p_max;
        Ok(SubproblemSolution {
            p_a: w.get(last, last).re,
            objective: tr_bw - tau * eta,
            w,
            eta,
            sdp_status: sol.status,
        })
    }
}

/// Warm start `W₀ = p₀·u·uᴴ` with Bob-aligned unit-modulus `u` and the
/// closed-form conservative power.
pub fn initial_feasible_point<T: Real>(
    qf: &QuadraticForms<T>,
    budget: &CovertnessBudget<T>,
    sigma_w2: T,
    p_max: T,
) -> (HermitianMatrix<T>, T) {
    let u = bob_aligned_vector(qf);
    let p0 = conservative_power(&u, &qf.mat_a, budget, sigma_w2, p_max);
    (HermitianMatrix::outer(&u, p0), p0)
}

/// Reflect vector from the dominant eigenpair of `W`.
///
/// The eigenvector is rotated so the last entry is real and positive, which
/// keeps `|v_n| = √(λmax/p_a)·|e_n| ≤ 1` whenever `W_nn ≤ p_a`. Returns
/// `(v, Tr(W) − λmax)`.
pub fn extract_rank_one<T: Real>(w: &HermitianMatrix<T>, p_a: T) -> (Vec<Complex<T>>, T) {
    let n1 = w.order();
    let ep = max_eigpair(w);
    let residual = w.trace() - ep.value;
    let zero = Complex::new(T::zero(), T::zero());
    if !(p_a > T::zero()) || n1 == 0 {
        return (vec![zero; n1.saturating_sub(1)], residual);
    }
    let last = ep.vector[n1 - 1];
    let phase = if last.norm() > T::zero() {
        last.conj() / last.norm()
    } else {
        Complex::new(T::one(), T::zero())
    };
    let scale = (ep.value.max(T::zero()) / p_a).sqrt();
    let v = ep.vector[..n1 - 1].iter().map(|&e| e * phase * scale).collect();
    (v, residual)
}

/// Clamps moduli to 1 (guards round-off after extraction).
fn clamp_unit_disc<T: Real>(v: &mut [Complex<T>], amplitude: AmplitudeConstraint) {
    for z in v.iter_mut() {
        let r = z.norm();
        if amplitude == AmplitudeConstraint::Unit {
            *z = if r > T::zero() { *z / r } else { Complex::new(T::one(), T::zero()) };
        } else if r > T::one() {
            *z = *z / r;
        }
    }
}

/// Largest covert power for a fixed reflect vector, `min(p_max, σ_w²·t*/gain)`.
///
/// A gain at the rounding level of `|āᴴu|` counts as exact cancellation, so a
/// nulling design keeps full power even when `t* = 0`.
pub fn covert_power_for<T: Real>(qf: &QuadraticForms<T>, v: &[Complex<T>], t_star: T, sigma_w2: T, p_max: T) -> T {
    let gain = crate::scenario::willie_gain(v, &qf.a, qf.h_aw);
    if gain > crate::scenario::cancellation_floor(v, &qf.a, qf.h_aw) {
        (sigma_w2 * t_star / gain).min(p_max)
    } else {
        p_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PscaStatus {
    Converged,
    MaxIter,
    SubproblemFailure,
}

#[derive(Debug, Clone)]
pub struct PscaResult<T> {
    pub design: ReflectDesign<T>,
    pub w_final: HermitianMatrix<T>,
    pub eta_final: T,
    /// `Tr(W) − λmax(W)` of the final iterate.
    pub rank_residual: T,
    pub iterations: usize,
    /// Penalized objective `Tr(BW) − τη` per outer iteration.
    pub objective_trace: Vec<T>,
    pub status: PscaStatus,
}

/// Runs the penalty loop and extracts a rank-one design.
///
/// After extraction the transmit power is re-optimized for the extracted
/// reflect vector, so the returned design meets the covertness constraint
/// with equality unless the power budget binds.
pub fn psca_optimize<T: Real>(qf: &QuadraticForms<T>, params: &SystemParams<T>, config: &PscaConfig<T>) -> Result<PscaResult<T>> {
    config.validate()?;
    let budget = params.budget()?;
    let n = qf.n_elements();
    let (sigma_w2, p_max) = (params.sigma_w2, params.p_max);
    let t_star = kl_radius(&budget)?;

    if qf.lambda_max_b() == T::zero() {
        let v = vec![Complex::new(T::zero(), T::zero()); n];
        return Ok(PscaResult {
            design: ReflectDesign::from_vector(T::zero(), &v, &qf.a, &qf.b, qf.h_ab, qf.h_aw, params)?,
            w_final: HermitianMatrix::zeros(n + 1),
            eta_final: T::zero(),
            rank_residual: T::zero(),
            iterations: 0,
            objective_trace: Vec::new(),
            status: PscaStatus::Converged,
        });
    }

    let sub = Subproblem::new(qf, t_star, p_max, sigma_w2, config.amplitude)?;
    let (w0, _) = initial_feasible_point(qf, &budget, sigma_w2, p_max);
    let scale = qf.lambda_max_b() * p_max;
    let warm = w0.trace_product(&qf.mat_b) / scale;
    let reference = if warm > T::zero() { warm } else { T::one() };
    // τ in physical units: relative value × ‖b̄‖²·(objective reference)
    let mut tau = config.tau0 * reference * qf.lambda_max_b();
    let tau_max = config.tau_max * reference * qf.lambda_max_b();

    let mut w_tilde = w0;
    let mut eta = T::zero();
    let mut trace = Vec::new();
    let mut status = PscaStatus::MaxIter;
    let mut iterations = 0;
    for _ in 0..config.max_outer {
        let sol = match sub.solve(Some(&w_tilde), tau) {
            Ok(s) => s,
            Err(e) if iterations == 0 => return Err(e),
            Err(_) => {
                status = PscaStatus::SubproblemFailure;
                break;
            }
        };
        iterations += 1;
        let prev = trace.last().copied();
        trace.push(sol.objective);
        eta = sol.eta;
        let tr_w = sol.w.trace();
        w_tilde = sol.w;
        let settled = prev.is_some_and(|p: T| {
            (sol.objective - p).abs() <= config.obj_tol * sol.objective.abs().max(T::min_positive_value())
        });
        if eta < config.eta_tol * tr_w && settled {
            status = PscaStatus::Converged;
            break;
        }
        tau = (tau * config.c).min(tau_max);
    }

    let p_w = w_tilde.get(n, n).re;
    let (mut v, rank_residual) = extract_rank_one(&w_tilde, p_w);
    clamp_unit_disc(&mut v, config.amplitude);
    let p_a = covert_power_for(qf, &v, t_star, sigma_w2, p_max);
    Ok(PscaResult {
        design: ReflectDesign::from_vector(p_a, &v, &qf.a, &qf.b, qf.h_ab, qf.h_aw, params)?,
        w_final: w_tilde,
        eta_final: eta,
        rank_residual,
        iterations,
        objective_trace: trace,
        status,
    })
}

/// Bob SNR bound from the rank-relaxed problem (no penalty, no rank cut).
pub fn solve_relaxed_upper_bound<T: Real>(qf: &QuadraticForms<T>, params: &SystemParams<T>, amplitude: AmplitudeConstraint) -> Result<T> {
    if qf.lambda_max_b() == T::zero() {
        return Ok(T::zero());
    }
    let t_star = kl_radius(&params.budget()?)?;
    let sub = Subproblem::new(qf, t_star, params.p_max, params.sigma_w2, amplitude)?;
    let sol = sub.solve(None, T::zero())?;
    Ok(sol.objective / params.sigma_b2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn forms_scalar_case() {
        let qf = build_quadratic_forms(&[c(0.0, 0.0)], &[c(1.0, 0.0)], c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(qf.mat_b.get(i, j), c(1.0, 0.0));
            }
        }
        assert!(build_quadratic_forms(&[c(0.0, 0.0)], &[], c(1.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn rank_one_extraction_exact() {
        let u = vec![c(0.6, -0.3), c(0.0, 1.0), c(1.0, 0.0)];
        let p = 2.5;
        let w = HermitianMatrix::outer(&u, p);
        let (v, res) = extract_rank_one(&w, p);
        assert!(res.abs() < 1e-12);
        for (got, want) in v.iter().zip(&u[..2]) {
            assert!((got - want).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_power_extracts_zero() {
        let w = HermitianMatrix::<f64>::zeros(3);
        let (v, res) = extract_rank_one(&w, 0.0);
        assert_eq!(v, vec![c(0.0, 0.0); 2]);
        assert_eq!(res, 0.0);
    }
}
