use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("near-singular Toeplitz system: prediction-error variance {variance:e} at order {order}")]
    NearSingular { order: usize, variance: f64 },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("circulant embedding failed: smallest eigenvalue {0:e}")]
    Embedding(f64),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("Fisher information is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("{source_name}, line {line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("gap in series: missing {0}")]
    Gap(String),

    #[error("{failed} of {total} replicates failed (first: {first})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::Parse { .. } | Error::Gap(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Map a CSV reader/writer failure, keeping the line number when known.
pub(crate) fn from_csv(source_name: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        _ => Error::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        },
    }
}
