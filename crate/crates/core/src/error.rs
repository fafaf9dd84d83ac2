use thiserror::Error;

/// Errors raised by the design algorithms and their numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value:e} outside domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("no sign change on bracket [{lo:e}, {hi:e}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("{what} did not converge within {iterations} iterations")]
    Convergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("perfect covertness infeasible: sum |a_n| = {reflect_sum:e} < |h_aw| = {direct:e}")]
    PerfectCovertnessInfeasible { reflect_sum: f64, direct: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("semidefinite subproblem failed: {0}")]
    Solver(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}
