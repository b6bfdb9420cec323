use thiserror::Error;

/// Error type shared by all simulation layers.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("point outside the configured domain: {0}")]
    OutOfDomain(String),

    #[error("density below the node guard: {0}")]
    NodeProximity(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("rejection-sampling envelope construction failed: {0}")]
    Envelope(String),

    #[error("degenerate step: direction nearly tangent to the leaf family ({0})")]
    DegenerateStep(String),

    #[error("trajectory failure budget exceeded: {failed} of {total} trajectories failed")]
    FailureBudget { failed: usize, total: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;

impl SimError {
    /// Process exit code for the CLI: 2 for validation/precondition
    /// problems, 3 for numerical failures discovered mid-run.
    pub fn exit_code(&self) -> u8 {
        match self {
            SimError::OutOfDomain(_)
            | SimError::Validation(_)
            | SimError::Envelope(_)
            | SimError::Config(_)
            | SimError::Io(_) => 2,
            SimError::NodeProximity(_)
            | SimError::DegenerateStep(_)
            | SimError::FailureBudget { .. }
            | SimError::Numerical(_) => 3,
        }
    }
}
