use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("mesh file line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(
        "root scan up to lambda = {lambda_max} captured {found} of {requested} eigenvalues; raise the upper bound"
    )]
    ScanExhausted {
        requested: usize,
        found: usize,
        lambda_max: f64,
    },

    #[error("bracketing failed: {0}")]
    Bracket(String),

    #[error("shifted pencil K + sigma*B is not positive definite at sigma = {sigma}; retry with sigma >= {suggested}")]
    SingularPencil { sigma: f64, suggested: f64 },

    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),

    #[error("cannot certify cluster partition: {0}")]
    Partition(String),

    #[error("rank-deficient basis: {0}")]
    RankDeficient(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ScanExhausted { .. }
                | Error::Bracket(_)
                | Error::SingularPencil { .. }
                | Error::NotConverged(_)
                | Error::Partition(_)
                | Error::RankDeficient(_)
        )
    }
}
