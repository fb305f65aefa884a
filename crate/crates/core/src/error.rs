use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    /// Too few samples for the requested interpolation or quadrature.
    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),

    /// A length scale (mollifier radius, increment, Besov scale) is below
    /// what the grid can resolve.
    #[error("resolution violation: {0}")]
    Resolution(String),

    #[error("jump is not admissible: |(m+ - m-) . nu| = {0:e}")]
    InadmissibleJump(f64),

    /// Argument outside the domain of the operation.
    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("nonzero mean {0:e}: antiderivative would not be periodic")]
    NonzeroMean(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed field file: {0}")]
    FieldFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
