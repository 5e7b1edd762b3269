//! Error taxonomy shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller broke an operation precondition (argument ranges, dimensions).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Model parameters describe a process that does not exist (most
    /// importantly `nu_i > 0` for `i >= 2`, which makes the density
    /// non-integrable). Maps to process exit code 2.
    #[error("validation: {0}")]
    Validation(String),

    /// An enumeration or grid size guard tripped before doing the work.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// The rejection sampler ran out of attempts. Maps to exit code 3.
    #[error("acceptance starvation: no sample accepted in {attempts} attempts \
             (acceptance rate below {rate:.3e}); switch to the mcmc sampler")]
    AcceptanceStarvation { attempts: u64, rate: f64 },

    /// A Monte Carlo ratio estimate lost its denominator to underflow.
    #[error("degenerate estimate: {0}")]
    DegenerateEstimate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
