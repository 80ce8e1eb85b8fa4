// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong while building, evolving or persisting a state.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error(
        "unstable augmented potential: smallest eigenvalue {min_eigenvalue:.6e} <= 0 \
         (bath coupling too large for the cutoff)"
    )]
    UnstableAugmentedPotential { min_eigenvalue: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    Asymmetric { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("unphysical covariance matrix: smallest symplectic eigenvalue {min_nu:.12} < 1 - {tolerance:e}")]
    Unphysical { min_nu: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid site selection: {0}")]
    InvalidSites(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("{0} requires a periodic chain")]
    UnsupportedBoundary(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("purity drift {drift:.3e} exceeds {tolerance:e} at t = {time}; reduce the integration step (dt = {dt})")]
    StepRejected { drift: f64, tolerance: f64, time: f64, dt: f64 },

    #[error(
        "horizon {horizon} reaches the bath recurrence time {recurrence:.3} (M = {modes}); \
         at least M = {required_modes} modes per oscillator are needed"
    )]
    RecurrenceGuard { horizon: f64, recurrence: f64, modes: usize, required_modes: usize },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("physics validity check failed: {0}")]
    Validity(String),

    #[error("{context} `{}`: {source}", path.display())]
    Io { context: &'static str, path: PathBuf, source: std::io::Error },

    #[error("malformed {what}: {message}")]
    Parse { what: &'static str, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(context: &'static str, path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { context, path: path.into(), source }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Process exit code used by the command-line driver.
    ///
    /// 2 for configuration problems, 3 for physics-validity breaches, 4 for
    /// recurrence-guard and stability failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } => 2,
            Error::InvalidSites(_) | Error::InvalidPartition(_) => 2,
            Error::Unphysical { .. } | Error::Validity(_) => 3,
            Error::RecurrenceGuard { .. }
            | Error::UnstableAugmentedPotential { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::StepRejected { .. }
            | Error::Calibration(_) => 4,
            _ => 1,
        }
    }
}
