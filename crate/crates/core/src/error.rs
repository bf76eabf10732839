use thiserror::Error;

/// Errors raised while reading, validating, evaluating or solving an MDP.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance JSON at `{path}`: {message}")]
    Json { path: String, message: String },

    #[error("invalid instance: {0}")]
    Validation(String),

    #[error("transition row for ({state}, {action}) sums to {sum}, expected 1")]
    RowSum {
        state: String,
        action: String,
        sum: f64,
    },

    #[error("negative probability {value} in transition row ({state}, {action}) towards {to}")]
    NegativeProbability {
        state: String,
        action: String,
        to: String,
        value: f64,
    },

    #[error("state `{0}` has no admissible action")]
    EmptyActionSet(String),

    #[error("policy count {count} exceeds enumeration cap {cap}")]
    PolicyCountOverflow { count: f64, cap: u64 },

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid setting: {0}")]
    InvalidSetting(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular linear system while computing {0}")]
    Singular(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{what} exceeded its budget of {budget} iterations")]
    BudgetExceeded { what: &'static str, budget: usize },

    #[error("interval set is empty")]
    EmptyIntervalSet,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Json { .. }
            | Error::Validation(_)
            | Error::RowSum { .. }
            | Error::NegativeProbability { .. }
            | Error::EmptyActionSet(_)
            | Error::InvalidPolicy(_)
            | Error::InvalidSetting(_)
            | Error::InvalidArgument(_)
            | Error::PolicyCountOverflow { .. } => 2,
            Error::BudgetExceeded { .. } => 3,
            Error::Singular(_) | Error::Numerical(_) | Error::EmptyIntervalSet => 4,
            Error::Io(_) | Error::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
