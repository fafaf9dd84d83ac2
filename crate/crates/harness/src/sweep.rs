//! Monte Carlo sweeps: every sweep value × trial draws one channel set and
//! runs the selected algorithms on it.

use std::time::Instant;

use irs_covert::scenario::trial_rng;
use irs_covert::ReflectDesign;
use rayon::prelude::*;

use crate::algorithms::{Algorithm, Run, Trial};
use crate::config::{ExperimentConfig, SweepKind, SweepPoint};
use crate::error::{HarnessError, Result};
use crate::records::{Status, TrialRecord};

/// Largest `N` at which SDP-based algorithms run without `allow_large`.
pub const SDP_ELEMENT_CAP: usize = 50;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepOptions {
    /// Run PSCA and the relaxation bound above [`SDP_ELEMENT_CAP`].
    pub allow_large: bool,
    /// Fill `wallclock_ms`. Off by default so output is byte-stable.
    pub timing: bool,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

/// A record together with the design it was computed from.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub record: TrialRecord,
    pub design: Option<ReflectDesign>,
}

/// Stream index of a trial. Every sweep value reuses the same streams, so a
/// trial sees the same fading numbers at every point of the sweep (common
/// random numbers, nested in `N`).
pub fn trial_stream(trial: usize) -> u64 {
    trial as u64
}

pub fn run_sweep(config: &ExperimentConfig, options: &SweepOptions) -> Result<Vec<TrialRecord>> {
    Ok(run_sweep_detailed(config, options)?.into_iter().map(|o| o.record).collect())
}

/// Location sweep: the config must sweep the IRS x coordinate.
pub fn run_location_sweep(config: &ExperimentConfig, options: &SweepOptions) -> Result<Vec<TrialRecord>> {
    match &config.sweep {
        Some(s) if s.kind() == SweepKind::IrsX => run_sweep(config, options),
        _ => Err(HarnessError::Config("location sweep needs an irs_x sweep".into())),
    }
}

/// Runs the sweep and keeps the designs alongside the records. Output is
/// sorted by (sweep value, trial, algorithm name) and independent of the
/// worker count.
pub fn run_sweep_detailed(config: &ExperimentConfig, options: &SweepOptions) -> Result<Vec<TrialOutput>> {
    config.validate()?;
    let points = config.points()?;
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..config.trials).map(move |t| (p, t)))
        .collect();
    let work = || -> Vec<TrialOutput> {
        jobs.par_iter()
            .flat_map_iter(|&(p, t)| run_trial(&points[p], config.seed, t, &config.algorithms, options))
            .collect()
    };
    let mut out = match options.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?
            .install(work),
        None => work(),
    };
    let index_of = |value: f64| points.iter().position(|p| p.value == value).unwrap_or(usize::MAX);
    out.sort_by(|x, y| {
        let (a, b) = (&x.record, &y.record);
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(index_of(a.sweep_value).cmp(&index_of(b.sweep_value)))
            .then(a.trial.cmp(&b.trial))
            .then(a.algorithm.name().cmp(b.algorithm.name()))
    });
    Ok(out)
}

/// All selected algorithms on one channel draw.
pub fn run_trial(
    point: &SweepPoint,
    seed: u64,
    trial: usize,
    algorithms: &[Algorithm],
    options: &SweepOptions,
) -> Vec<TrialOutput> {
    let mut rng = trial_rng(seed, trial_stream(trial));
    let sampled = Trial::sample(&point.geometry, &point.params, &mut rng);
    let n = point.params.n_elements();
    algorithms
        .iter()
        .map(|&alg| {
            let start = Instant::now();
            let run = match &sampled {
                _ if alg.uses_sdp() && n > SDP_ELEMENT_CAP && !options.allow_large => Run::skipped(),
                Ok(trial) => trial.run(alg),
                Err(_) => Run { status: Status::Failed, outcome: None, design: None },
            };
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let mut record = TrialRecord::new(point.value, trial, alg, run.status, run.outcome);
            if run.status == Status::Failed {
                record = TrialRecord::new(point.value, trial, alg, Status::Failed, None);
            }
            if options.timing && run.status != Status::Skipped {
                record.wallclock_ms = Some(elapsed);
            }
            TrialOutput { record, design: run.design }
        })
        .collect()
}

/// At least one record failed outright.
pub fn has_hard_failure(records: &[TrialRecord]) -> bool {
    records.iter().any(|r| r.status == Status::Failed)
}
