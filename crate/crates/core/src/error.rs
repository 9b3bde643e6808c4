use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation was asked to evaluate at a pole of the kernel.
    #[error("singular point: {0}")]
    Singular(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Off-diagonal routines were called with z = w.
    #[error("z and w coincide; use the diagonal integral")]
    Diagonal,

    /// The excised diagonal integrals neither settle nor grow logarithmically.
    #[error("inconclusive diagonal asymptotics (excised values: {evidence:?})")]
    InconclusiveDiagonal { evidence: Vec<f64> },

    #[error("no sign change of |exp(z) - 1| - 1 along the segment")]
    NoSignChange,

    /// A quadrature did not reach its target tolerance.
    #[error("integral did not converge (error estimate {error:e})")]
    NotConverged { error: f64 },

    #[error("least-norm solve failed: residual {residual:e}")]
    Solver { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
