//! The design algorithms a sweep can run, behind one dispatch point.

use std::fmt;
use std::str::FromStr;

use irs_covert::covertness::{kl_divergence, kl_radius};
use irs_covert::no_csi::no_csi_suite;
use irs_covert::numerics::sdp::SdpStatus;
use irs_covert::psca::{build_quadratic_forms, psca_optimize, AmplitudeConstraint, PscaStatus, Subproblem};
use irs_covert::scenario::{cascade_vectors, sample_channels_with};
use irs_covert::two_stage::{baseline_no_irs, two_stage_optimize};
use irs_covert::{
    ChannelSet, Geometry, NoCsiInstance, PscaConfig, QuadraticForms, ReflectDesign, SystemParams, TwoStageConfig,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::records::{Outcome, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Psca,
    PscaUnitAmp,
    TwoStage,
    /// Relaxed SDP bound; not a realizable design.
    UpperBound,
    NoIrs,
    NocsiUnit,
    NocsiCommon,
    NocsiPerElement,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Psca,
        Algorithm::PscaUnitAmp,
        Algorithm::TwoStage,
        Algorithm::UpperBound,
        Algorithm::NoIrs,
        Algorithm::NocsiUnit,
        Algorithm::NocsiCommon,
        Algorithm::NocsiPerElement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Psca => "psca",
            Algorithm::PscaUnitAmp => "psca_unit_amp",
            Algorithm::TwoStage => "two_stage",
            Algorithm::UpperBound => "upper_bound",
            Algorithm::NoIrs => "no_irs",
            Algorithm::NocsiUnit => "nocsi_unit",
            Algorithm::NocsiCommon => "nocsi_common",
            Algorithm::NocsiPerElement => "nocsi_per_element",
        }
    }

    /// Runs an interior-point SDP per iteration, so it is capped by element count.
    pub fn uses_sdp(self) -> bool {
        matches!(self, Algorithm::Psca | Algorithm::PscaUnitAmp | Algorithm::UpperBound)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

/// Result of one algorithm run. `design` is absent for the relaxation bound
/// and for failures.
#[derive(Debug, Clone)]
pub struct Run {
    pub status: Status,
    pub outcome: Option<Outcome>,
    pub design: Option<ReflectDesign>,
}

impl Run {
    fn failed() -> Self {
        Run { status: Status::Failed, outcome: None, design: None }
    }

    pub(crate) fn skipped() -> Self {
        Run { status: Status::Skipped, outcome: None, design: None }
    }

    fn from_design(design: ReflectDesign, status: Status) -> Self {
        let outcome = Outcome {
            bob_snr: design.bob_snr,
            p_a: design.p_a,
            willie_gain: design.willie_gain,
            kl_value: design.kl_value,
        };
        let status = if outcome_is_finite(&outcome) { status } else { Status::Failed };
        Run { status, outcome: Some(outcome), design: Some(design) }
    }
}

fn outcome_is_finite(o: &Outcome) -> bool {
    [o.bob_snr, o.p_a, o.willie_gain, o.kl_value].iter().all(|v| v.is_finite())
}

/// One channel realization with everything the algorithms derive from it.
#[derive(Debug, Clone)]
pub struct Trial {
    pub params: SystemParams,
    pub channels: ChannelSet,
    pub qf: QuadraticForms,
    pub nocsi: NoCsiInstance,
}

impl Trial {
    pub fn sample<R: Rng + ?Sized>(geometry: &Geometry, params: &SystemParams, rng: &mut R) -> irs_covert::Result<Self> {
        let channels = sample_channels_with(geometry, params, rng)?;
        let (a, b) = cascade_vectors(&channels);
        let qf = build_quadratic_forms(&a, &b, channels.h_ab, channels.h_aw)?;
        let nocsi = NoCsiInstance::from_channels(&channels, &geometry.path_gains(params.beta0)?, params)?;
        Ok(Trial { params: *params, channels, qf, nocsi })
    }

    pub fn run(&self, algorithm: Algorithm) -> Run {
        self.try_run(algorithm).unwrap_or_else(|_| Run::failed())
    }

    fn try_run(&self, algorithm: Algorithm) -> irs_covert::Result<Run> {
        let p = &self.params;
        Ok(match algorithm {
            Algorithm::Psca | Algorithm::PscaUnitAmp => {
                let amplitude = if algorithm == Algorithm::Psca {
                    AmplitudeConstraint::Bounded
                } else {
                    AmplitudeConstraint::Unit
                };
                let res = psca_optimize(&self.qf, p, &PscaConfig { amplitude, ..Default::default() })?;
                let status = match res.status {
                    PscaStatus::Converged => Status::Ok,
                    PscaStatus::MaxIter => Status::MaxIter,
                    PscaStatus::SubproblemFailure => Status::Failed,
                };
                Run::from_design(res.design, status)
            }
            Algorithm::TwoStage => {
                let res = two_stage_optimize(&self.qf, p, &TwoStageConfig::default())?;
                let status = if res.converged { Status::Ok } else { Status::MaxIter };
                Run::from_design(res.design, status)
            }
            Algorithm::UpperBound => self.upper_bound()?,
            Algorithm::NoIrs => Run::from_design(baseline_no_irs(self.channels.h_ab, self.channels.h_aw, p)?, Status::Ok),
            Algorithm::NocsiUnit | Algorithm::NocsiCommon | Algorithm::NocsiPerElement => {
                let suite = no_csi_suite(&self.nocsi)?;
                let design = match algorithm {
                    Algorithm::NocsiUnit => suite.unit,
                    Algorithm::NocsiCommon => suite.common,
                    _ => suite.per_element,
                };
                Run::from_design(design, Status::Ok)
            }
        })
    }

    /// Relaxed problem solved once without penalty. Power is `W_{N+1,N+1}`
    /// and the Willie gain is `Tr(AW)/p_a`, i.e. averaged over the relaxed
    /// covariance.
    fn upper_bound(&self) -> irs_covert::Result<Run> {
        let p = &self.params;
        let t_star = kl_radius(&p.budget()?)?;
        if self.qf.lambda_max_b() == 0.0 {
            return Ok(Run {
                status: Status::Ok,
                outcome: Some(Outcome { bob_snr: 0.0, p_a: 0.0, willie_gain: 0.0, kl_value: 0.0 }),
                design: None,
            });
        }
        let sub = Subproblem::new(&self.qf, t_star, p.p_max, p.sigma_w2, AmplitudeConstraint::Bounded)?;
        let sol = sub.solve(None, 0.0)?;
        let p_a = sol.p_a.max(0.0);
        let received = sol.w.trace_product(&self.qf.mat_a).max(0.0);
        let willie_gain = if p_a > 0.0 { received / p_a } else { 0.0 };
        let outcome = Outcome {
            bob_snr: sol.objective / p.sigma_b2,
            p_a,
            willie_gain,
            kl_value: kl_divergence(p_a, willie_gain, p.sigma_w2, p.blocklength)?,
        };
        let status = match sol.sdp_status {
            SdpStatus::Optimal => Status::Ok,
            SdpStatus::Inaccurate => Status::MaxIter,
        };
        let status = if outcome_is_finite(&outcome) { status } else { Status::Failed };
        Ok(Run { status, outcome: Some(outcome), design: None })
    }
}
