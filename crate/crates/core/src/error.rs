use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },

    #[error("unknown identifier `{name}` at column {column}")]
    UnknownIdentifier { name: String, column: usize },

    #[error("exponent at column {column} must be a nonnegative integer literal")]
    NonIntegerExponent { column: usize },

    #[error("unknown problem `{name}`; available: {}", available.join(", "))]
    UnknownProblem {
        name: String,
        available: Vec<&'static str>,
    },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// The eigen factorization of a 1D operator is unusable; callers should
    /// fall back to PCG or a direct solve.
    #[error("eigen factorization unusable: {0}")]
    EigenFallback(String),

    #[error("singular operator: {0}")]
    SingularOperator(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors raised by a linear solver rather than by configuration.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::SolverFailure(_)
                | Error::EigenFallback(_)
                | Error::SingularOperator(_)
                | Error::NonFinite(_)
        )
    }
}
