//! Experiment harness for the covert IRS designs: configuration, Monte Carlo
//! sweeps, CSV/JSON output, aggregation and a self-check report.

pub mod aggregate;
pub mod algorithms;
pub mod config;
pub mod emit;
pub mod error;
pub mod oracles;
pub mod records;
pub mod sweep;
pub mod validate;

pub use aggregate::{aggregate, AggregateRow};
pub use algorithms::{Algorithm, Trial};
pub use config::{ExperimentConfig, Sweep, SweepKind};
pub use emit::{emit, Format};
pub use error::{HarnessError, Result};
pub use records::{Status, TrialRecord};
pub use sweep::{run_location_sweep, run_sweep, SweepOptions};
pub use validate::{validate, validate_with, Report};
