//! Per-trial output rows.

use serde::{Deserialize, Serialize};

use crate::algorithms::Algorithm;

/// Floor applied before taking logarithms, so zeros map to −300 dB.
pub const LINEAR_FLOOR: f64 = 1e-30;

/// `10·log10(max(x, 1e-30))`
pub fn to_db(x: f64) -> f64 {
    10.0 * x.max(LINEAR_FLOOR).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Iteration cap reached; the numbers are the last iterate.
    MaxIter,
    /// The algorithm errored; numeric fields are empty.
    Failed,
    /// Not run, e.g. PSCA above the element cap.
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::MaxIter => "max_iter",
            Status::Failed => "failed",
            Status::Skipped => "skipped",
        }
    }
}

/// Linear-domain outcome of one algorithm on one channel draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub bob_snr: f64,
    pub p_a: f64,
    pub willie_gain: f64,
    pub kl_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sweep_value: f64,
    pub trial: usize,
    pub algorithm: Algorithm,
    pub bob_snr_db: Option<f64>,
    pub p_a_dbm: Option<f64>,
    pub willie_gain_db: Option<f64>,
    pub kl_value: Option<f64>,
    pub wallclock_ms: Option<f64>,
    pub status: Status,
}

impl TrialRecord {
    pub fn new(sweep_value: f64, trial: usize, algorithm: Algorithm, status: Status, outcome: Option<Outcome>) -> Self {
        Self {
            sweep_value,
            trial,
            algorithm,
            bob_snr_db: outcome.map(|o| to_db(o.bob_snr)),
            p_a_dbm: outcome.map(|o| to_db(o.p_a) + 30.0),
            willie_gain_db: outcome.map(|o| to_db(o.willie_gain)),
            kl_value: outcome.map(|o| o.kl_value),
            wallclock_ms: None,
            status,
        }
    }

    /// Numeric fields are present and finite.
    pub fn is_complete(&self) -> bool {
        [self.bob_snr_db, self.p_a_dbm, self.willie_gain_db, self.kl_value]
            .iter()
            .all(|v| v.is_some_and(f64::is_finite))
    }
}
