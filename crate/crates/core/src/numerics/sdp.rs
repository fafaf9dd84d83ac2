//! Primal–dual interior-point solver for small semidefinite programs.
//!
//! Standard form with one PSD block `X` and a block of non-negative scalars `x`:
//!
//! ```text
//! minimize    ⟨C, X⟩ + cᵀx
//! subject to  ⟨Aᵢ, X⟩ + aᵢᵀx = bᵢ,   X ⪰ 0,  x ≥ 0
//! ```
//!
//! Search directions are HKM with a Mehrotra predictor–corrector. The method
//! is infeasible-start, so no strictly feasible point has to be supplied.

use crate::error::{Error, Result};
use crate::numerics::dense::RealMatrix;
use crate::scalar::Real;

/// Symmetric coefficient matrix of one constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintMatrix<T> {
    Zero,
    /// Full list of non-zero entries `(i, j, value)`; both triangles present.
    Sparse(Vec<(usize, usize, T)>),
    Dense(RealMatrix<T>),
}

impl<T: Real> ConstraintMatrix<T> {
    /// Builds a sparse matrix from upper- or lower-triangle entries, mirroring
    /// off-diagonal ones.
    pub fn sparse_symmetric(entries: impl IntoIterator<Item = (usize, usize, T)>) -> Self {
        let mut out = Vec::new();
        for (i, j, v) in entries {
            out.push((i, j, v));
            if i != j {
                out.push((j, i, v));
            }
        }
        Self::Sparse(out)
    }

    /// `Tr(A·K) = Σ A_pq K_qp` for an arbitrary square `K`.
    fn trace_with(&self, k: &RealMatrix<T>) -> T {
        match self {
            Self::Zero => T::zero(),
            Self::Sparse(e) => e.iter().map(|&(p, q, v)| v * k[(q, p)]).sum(),
            Self::Dense(a) => {
                let n = a.order();
                let mut acc = T::zero();
                for p in 0..n {
                    let row = a.row(p);
                    for q in 0..n {
                        acc += row[q] * k[(q, p)];
                    }
                }
                acc
            }
        }
    }

    fn add_scaled_into(&self, s: T, out: &mut RealMatrix<T>) {
        match self {
            Self::Zero => {}
            Self::Sparse(e) => {
                for &(p, q, v) in e {
                    out[(p, q)] += s * v;
                }
            }
            Self::Dense(a) => out.axpy_in_place(s, a),
        }
    }

    fn frobenius_norm(&self) -> T {
        match self {
            Self::Zero => T::zero(),
            Self::Sparse(e) => e.iter().map(|&(_, _, v)| v * v).sum::<T>().sqrt(),
            Self::Dense(a) => a.frobenius_norm(),
        }
    }
}

/// One linear equality constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpConstraint<T> {
    pub psd: ConstraintMatrix<T>,
    /// Sparse coefficients on the scalar block, `(index, value)`.
    pub lp: Vec<(usize, T)>,
    pub rhs: T,
}

/// A problem in the standard form above.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem<T> {
    pub cost_psd: RealMatrix<T>,
    pub cost_lp: Vec<T>,
    pub constraints: Vec<SdpConstraint<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpSettings<T> {
    /// Target for relative gap and relative primal/dual residuals.
    pub tol: T,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: T,
}

impl<T: Real> Default for SdpSettings<T> {
    fn default() -> Self {
        Self {
            tol: T::tol(1e-10),
            max_iter: 100,
            step_fraction: T::lit(0.98),
        }
    }
}

/// Search direction `(ΔX, Δx_lp, Δy, ΔZ, Δz_lp)`.
type NewtonStep<T> = (RealMatrix<T>, Vec<T>, Vec<T>, RealMatrix<T>, Vec<T>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    /// Stopped early (iteration cap or stalled progress); see the residuals.
    Inaccurate,
}

#[derive(Debug, Clone)]
pub struct SdpSolution<T> {
    pub x: RealMatrix<T>,
    pub x_lp: Vec<T>,
    pub y: Vec<T>,
    pub z: RealMatrix<T>,
    pub z_lp: Vec<T>,
    pub primal_objective: T,
    pub dual_objective: T,
    pub primal_infeasibility: T,
    pub dual_infeasibility: T,
    pub relative_gap: T,
    pub iterations: usize,
    pub status: SdpStatus,
}

struct Residuals<T> {
    r_d: RealMatrix<T>,
    r_d_lp: Vec<T>,
    p_inf: T,
    d_inf: T,
    gap: T,
    p_obj: T,
    d_obj: T,
}

impl<T: Real> SdpProblem<T> {
    pub fn order(&self) -> usize {
        self.cost_psd.order()
    }

    fn validate(&self) -> Result<()> {
        let n = self.order();
        let n_lp = self.cost_lp.len();
        for (k, c) in self.constraints.iter().enumerate() {
            let bad_psd = match &c.psd {
                ConstraintMatrix::Zero => false,
                ConstraintMatrix::Sparse(e) => e.iter().any(|&(i, j, _)| i >= n || j >= n),
                ConstraintMatrix::Dense(a) => a.order() != n,
            };
            if bad_psd || c.lp.iter().any(|&(i, _)| i >= n_lp) {
                return Err(Error::Solver(format!("constraint {k} indexes outside the variable blocks")));
            }
        }
        Ok(())
    }

    /// `𝒜(K)` restricted to the PSD block.
    fn apply(&self, k: &RealMatrix<T>) -> Vec<T> {
        self.constraints.iter().map(|c| c.psd.trace_with(k)).collect()
    }

    fn apply_lp(&self, x: &[T]) -> Vec<T> {
        self.constraints
            .iter()
            .map(|c| c.lp.iter().map(|&(i, v)| v * x[i]).sum())
            .collect()
    }

    /// `𝒜*(y)` on both blocks.
    fn adjoint(&self, y: &[T]) -> (RealMatrix<T>, Vec<T>) {
        let mut m = RealMatrix::zeros(self.order());
        let mut v = vec![T::zero(); self.cost_lp.len()];
        for (c, &yi) in self.constraints.iter().zip(y) {
            c.psd.add_scaled_into(yi, &mut m);
            for &(i, a) in &c.lp {
                v[i] += yi * a;
            }
        }
        (m, v)
    }

    fn residuals(&self, x: &RealMatrix<T>, xl: &[T], y: &[T], z: &RealMatrix<T>, zl: &[T]) -> Residuals<T> {
        let ax = self.apply(x);
        let axl = self.apply_lp(xl);
        let r_p: Vec<T> = self
            .constraints
            .iter()
            .enumerate()
            .map(|(i, c)| c.rhs - ax[i] - axl[i])
            .collect();
        let (aty, aty_lp) = self.adjoint(y);
        let mut r_d = self.cost_psd.add_scaled(-T::one(), &aty);
        r_d.axpy_in_place(-T::one(), z);
        let r_d_lp: Vec<T> = (0..xl.len()).map(|i| self.cost_lp[i] - aty_lp[i] - zl[i]).collect();

        let b_norm = norm(&self.constraints.iter().map(|c| c.rhs).collect::<Vec<_>>());
        let c_norm = (self.cost_psd.frobenius_norm().powi(2) + norm(&self.cost_lp).powi(2)).sqrt();
        let p_obj = self.cost_psd.inner(x) + dot(&self.cost_lp, xl);
        let d_obj: T = self.constraints.iter().zip(y).map(|(c, &yi)| c.rhs * yi).sum();
        Residuals {
            p_inf: norm(&r_p) / (T::one() + b_norm),
            d_inf: (r_d.frobenius_norm().powi(2) + norm(&r_d_lp).powi(2)).sqrt() / (T::one() + c_norm),
            gap: (p_obj - d_obj).abs() / (T::one() + p_obj.abs() + d_obj.abs()),
            r_d,
            r_d_lp,
            p_obj,
            d_obj,
        }
    }

    /// Schur complement `M_ij = Tr(Aᵢ X Aⱼ Z⁻¹) + Σ_k a_ik a_jk x_k/z_k`.
    fn schur(&self, x: &RealMatrix<T>, zi: &RealMatrix<T>, ratio: &[T]) -> RealMatrix<T> {
        let m = self.constraints.len();
        // G_j = X·A_j·Z⁻¹ for the dense constraints
        let dense_g: Vec<Option<RealMatrix<T>>> = self
            .constraints
            .iter()
            .map(|c| match &c.psd {
                ConstraintMatrix::Dense(a) => Some(x.matmul(a).matmul(zi)),
                _ => None,
            })
            .collect();
        let mut out = RealMatrix::zeros(m);
        for i in 0..m {
            for j in i..m {
                let (ci, cj) = (&self.constraints[i].psd, &self.constraints[j].psd);
                let v = match (ci, cj, &dense_g[i], &dense_g[j]) {
                    (ConstraintMatrix::Zero, _, _, _) | (_, ConstraintMatrix::Zero, _, _) => T::zero(),
                    (_, _, _, Some(gj)) => ci.trace_with(gj),
                    (_, _, Some(gi), _) => cj.trace_with(gi),
                    (ConstraintMatrix::Sparse(ei), ConstraintMatrix::Sparse(ej), _, _) => {
                        let mut acc = T::zero();
                        for &(p, q, a) in ei {
                            for &(r, s, c) in ej {
                                acc += a * x[(q, r)] * c * zi[(s, p)];
                            }
                        }
                        acc
                    }
                    _ => unreachable!("dense constraints always carry a precomputed product"),
                };
                let lp: T = lp_overlap(&self.constraints[i].lp, &self.constraints[j].lp, ratio);
                out[(i, j)] = v + lp;
                out[(j, i)] = v + lp;
            }
        }
        out
    }
}

fn lp_overlap<T: Real>(a: &[(usize, T)], b: &[(usize, T)], ratio: &[T]) -> T {
    let mut acc = T::zero();
    for &(i, va) in a {
        for &(j, vb) in b {
            if i == j {
                acc += va * vb * ratio[i];
            }
        }
    }
    acc
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Largest `α` with `X + α·D ⪰ 0` (infinite if `D ⪰ 0`).
fn max_step_psd<T: Real>(x: &RealMatrix<T>, d: &RealMatrix<T>) -> Option<T> {
    let li = x.cholesky()?.inverse_factor();
    let scaled = li.matmul(d).matmul(&li.transpose()).symmetrized();
    let lmin = scaled.min_eigenvalue();
    Some(if lmin < T::zero() { -lmin.recip() } else { T::infinity() })
}

fn max_step_lp<T: Real>(x: &[T], d: &[T]) -> T {
    x.iter()
        .zip(d)
        .filter(|(_, &di)| di < T::zero())
        .map(|(&xi, &di)| -xi / di)
        .fold(T::infinity(), T::min)
}

/// Solves the problem; fails only on numerical breakdown.
pub fn solve_sdp<T: Real>(problem: &SdpProblem<T>, settings: &SdpSettings<T>) -> Result<SdpSolution<T>> {
    problem.validate()?;
    let n = problem.order();
    let n_lp = problem.cost_lp.len();
    let m = problem.constraints.len();
    let n_tot = T::lit((n + n_lp) as f64);
    let sqrt_n = T::lit(n as f64).sqrt();

    // starting point scaled to the data
    let mut xi = T::lit(10.0).max(sqrt_n);
    let mut zeta = T::lit(10.0).max(sqrt_n).max(problem.cost_psd.frobenius_norm()).max(norm(&problem.cost_lp));
    for c in &problem.constraints {
        let a_norm = c.psd.frobenius_norm() + norm(&c.lp.iter().map(|p| p.1).collect::<Vec<_>>());
        xi = xi.max(sqrt_n * (T::one() + c.rhs.abs()) / (T::one() + a_norm));
        zeta = zeta.max(a_norm);
    }
    let mut x = RealMatrix::identity(n).scaled(xi);
    let mut xl = vec![xi; n_lp];
    let mut y = vec![T::zero(); m];
    let mut z = RealMatrix::identity(n).scaled(zeta);
    let mut zl = vec![zeta; n_lp];

    let mut best_merit = T::infinity();
    let mut stall = 0usize;
    let mut iterations = 0usize;
    let status = loop {
        let res = problem.residuals(&x, &xl, &y, &z, &zl);
        let merit = res.p_inf.max(res.d_inf).max(res.gap);
        if res.p_inf < settings.tol && res.d_inf < settings.tol && res.gap < settings.tol {
            break SdpStatus::Optimal;
        }
        if merit < best_merit * T::lit(0.9) {
            best_merit = merit;
            stall = 0;
        } else {
            stall += 1;
        }
        if iterations >= settings.max_iter || stall >= 8 {
            break SdpStatus::Inaccurate;
        }
        iterations += 1;

        let mu = (x.inner(&z) + dot(&xl, &zl)) / n_tot;
        let zi = z
            .cholesky()
            .ok_or_else(|| Error::Solver("dual slack lost definiteness".into()))?
            .inverse();
        let ratio: Vec<T> = xl.iter().zip(&zl).map(|(&a, &b)| a / b).collect();
        let schur = problem.schur(&x, &zi, &ratio);
        let chol = factor_regularized(&schur)?;

        // one Newton solve for a given centring σ and second-order correction
        let direction = |sigma: T,
                         corr: Option<(&RealMatrix<T>, &[T])>|
         -> NewtonStep<T> {
            // K = (X·R_d + ΔXa·ΔZa − σμI)·Z⁻¹
            let mut inner = x.matmul(&res.r_d);
            if let Some((dxdz, _)) = corr {
                inner.axpy_in_place(T::one(), dxdz);
            }
            for i in 0..n {
                inner[(i, i)] -= sigma * mu;
            }
            let k = inner.matmul(&zi);
            let ak = problem.apply(&k);
            let lp_term: Vec<T> = (0..n_lp)
                .map(|i| {
                    let mut t = xl[i] * res.r_d_lp[i] - sigma * mu;
                    if let Some((_, dd)) = corr {
                        t += dd[i];
                    }
                    t / zl[i]
                })
                .collect();
            let a_lp = problem.apply_lp(&lp_term);
            let rhs: Vec<T> = (0..m)
                .map(|i| problem.constraints[i].rhs + ak[i] + a_lp[i])
                .collect();
            let dy = chol.solve(&rhs);
            let (aty, aty_lp) = problem.adjoint(&dy);
            let dz = res.r_d.add_scaled(-T::one(), &aty);
            let dzl: Vec<T> = (0..n_lp).map(|i| res.r_d_lp[i] - aty_lp[i]).collect();
            // ΔX = −X − (X·ΔZ + ΔXa·ΔZa − σμI)·Z⁻¹
            let mut t = x.matmul(&dz);
            if let Some((dxdz, _)) = corr {
                t.axpy_in_place(T::one(), dxdz);
            }
            for i in 0..n {
                t[(i, i)] -= sigma * mu;
            }
            let dx = x.add_scaled(T::one(), &t.matmul(&zi)).scaled(-T::one()).symmetrized();
            let dxl: Vec<T> = (0..n_lp)
                .map(|i| {
                    let mut t = xl[i] * dzl[i] - sigma * mu;
                    if let Some((_, dd)) = corr {
                        t += dd[i];
                    }
                    -xl[i] - t / zl[i]
                })
                .collect();
            (dx, dxl, dy, dz, dzl)
        };

        let step_lengths = |dx: &RealMatrix<T>, dxl: &[T], dz: &RealMatrix<T>, dzl: &[T]| -> Result<(T, T)> {
            let ap = max_step_psd(&x, dx)
                .ok_or_else(|| Error::Solver("primal iterate lost definiteness".into()))?
                .min(max_step_lp(&xl, dxl));
            let ad = max_step_psd(&z, dz)
                .ok_or_else(|| Error::Solver("dual iterate lost definiteness".into()))?
                .min(max_step_lp(&zl, dzl));
            Ok((ap, ad))
        };

        // predictor
        let (dxa, dxla, _, dza, dzla) = direction(T::zero(), None);
        let (ap, ad) = step_lengths(&dxa, &dxla, &dza, &dzla)?;
        let (ap, ad) = (ap.min(T::one()), ad.min(T::one()));
        let x_aff = x.add_scaled(ap, &dxa);
        let z_aff = z.add_scaled(ad, &dza);
        let lp_aff: T = (0..n_lp)
            .map(|i| (xl[i] + ap * dxla[i]) * (zl[i] + ad * dzla[i]))
            .sum();
        let mu_aff = (x_aff.inner(&z_aff) + lp_aff) / n_tot;
        let sigma = (mu_aff / mu).max(T::zero()).min(T::one()).powi(3);

        // corrector
        let dxdz = dxa.matmul(&dza);
        let dd: Vec<T> = (0..n_lp).map(|i| dxla[i] * dzla[i]).collect();
        let (dx, dxl, dy, dz, dzl) = direction(sigma, Some((&dxdz, &dd)));
        let (ap, ad) = step_lengths(&dx, &dxl, &dz, &dzl)?;
        let gamma = settings.step_fraction;
        let mut ap = (gamma * ap).min(T::one());
        let mut ad = (gamma * ad).min(T::one());

        // guard against round-off pushing an iterate out of the cone
        for _ in 0..30 {
            let xn = x.add_scaled(ap, &dx);
            if xn.cholesky().is_some() {
                x = xn;
                break;
            }
            ap *= T::lit(0.8);
        }
        for _ in 0..30 {
            let zn = z.add_scaled(ad, &dz);
            if zn.cholesky().is_some() {
                z = zn;
                break;
            }
            ad *= T::lit(0.8);
        }
        for i in 0..n_lp {
            xl[i] += ap * dxl[i];
            zl[i] += ad * dzl[i];
        }
        for i in 0..m {
            y[i] += ad * dy[i];
        }
        if !(x.max_abs().is_finite() && z.max_abs().is_finite()) {
            return Err(Error::Solver("iterates diverged".into()));
        }
    };

    let res = problem.residuals(&x, &xl, &y, &z, &zl);
    Ok(SdpSolution {
        primal_objective: res.p_obj,
        dual_objective: res.d_obj,
        primal_infeasibility: res.p_inf,
        dual_infeasibility: res.d_inf,
        relative_gap: res.gap,
        x,
        x_lp: xl,
        y,
        z,
        z_lp: zl,
        iterations,
        status,
    })
}

/// Cholesky of the Schur complement, with a diagonal shift if it is only
/// numerically semidefinite.
fn factor_regularized<T: Real>(m: &RealMatrix<T>) -> Result<crate::numerics::dense::Cholesky<T>> {
    if let Some(c) = m.cholesky() {
        return Ok(c);
    }
    let scale = (0..m.order()).map(|i| m[(i, i)].abs()).fold(T::zero(), T::max).max(T::min_positive_value());
    let mut shift = scale * T::epsilon() * T::lit(16.0);
    for _ in 0..12 {
        let mut r = m.clone();
        for i in 0..m.order() {
            r[(i, i)] += shift;
        }
        if let Some(c) = r.cholesky() {
            return Ok(c);
        }
        shift *= T::lit(10.0);
    }
    Err(Error::Solver("Schur complement is singular".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_entry(i: usize) -> ConstraintMatrix<f64> {
        ConstraintMatrix::sparse_symmetric([(i, i, 1.0)])
    }

    #[test]
    fn trace_constrained_min_eigenvalue() {
        // min ⟨C, X⟩ s.t. Tr X = 1 gives λ_min(C)
        let c = RealMatrix::from_row_major(3, vec![2.0_f64, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, 1.0]);
        let problem = SdpProblem {
            cost_psd: c.clone(),
            cost_lp: vec![],
            constraints: vec![SdpConstraint {
                psd: ConstraintMatrix::Dense(RealMatrix::identity(3)),
                lp: vec![],
                rhs: 1.0,
            }],
        };
        let sol = solve_sdp(&problem, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        let want = c.min_eigenvalue();
        assert!((sol.primal_objective - want).abs() < 1e-8, "{} vs {}", sol.primal_objective, want);
    }

    #[test]
    fn inequalities_through_slacks() {
        // min −X01 s.t. X00 + s0 = 1, X11 + s1 = 4 → X01 = 2
        let c = ConstraintMatrix::sparse_symmetric([(0, 1, -0.5)]);
        let mut cost = RealMatrix::zeros(2);
        c.add_scaled_into(1.0, &mut cost);
        let problem = SdpProblem {
            cost_psd: cost,
            cost_lp: vec![0.0, 0.0],
            constraints: vec![
                SdpConstraint { psd: diag_entry(0), lp: vec![(0, 1.0)], rhs: 1.0 },
                SdpConstraint { psd: diag_entry(1), lp: vec![(1, 1.0)], rhs: 4.0 },
            ],
        };
        let sol = solve_sdp(&problem, &SdpSettings::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.x[(0, 1)] - 2.0).abs() < 1e-7);
        assert!((sol.primal_objective + 2.0).abs() < 1e-8);
    }

    #[test]
    fn pure_lp_block() {
        // min x0 + 2 x1 s.t. x0 + x1 = 1 (PSD block trivial)
        let problem = SdpProblem {
            cost_psd: RealMatrix::zeros(1),
            cost_lp: vec![1.0, 2.0],
            constraints: vec![
                SdpConstraint { psd: ConstraintMatrix::Zero, lp: vec![(0, 1.0), (1, 1.0)], rhs: 1.0 },
                SdpConstraint { psd: diag_entry(0), lp: vec![], rhs: 1.0 },
            ],
        };
        let sol = solve_sdp(&problem, &SdpSettings::default()).unwrap();
        assert!((sol.primal_objective - 1.0).abs() < 1e-8);
        assert!(sol.x_lp[1].abs() < 1e-8);
    }

    #[test]
    fn out_of_range_index_rejected() {
        let problem = SdpProblem {
            cost_psd: RealMatrix::<f64>::zeros(1),
            cost_lp: vec![],
            constraints: vec![SdpConstraint { psd: diag_entry(3), lp: vec![], rhs: 1.0 }],
        };
        assert!(solve_sdp(&problem, &SdpSettings::default()).is_err());
    }
}
