use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("vectors do not form a frame")]
    NotAFrame,
    #[error("complement property check limited to 24 vectors, got {0}")]
    TooManyVectors(usize),
    #[error("matrix violates the 2x2 eigenvalue constraints (residual {0:.3e})")]
    ConstraintViolated(f64),
    #[error("wrong Choi rank: expected {expected}, found {found}")]
    WrongRank { expected: usize, found: usize },
    #[error("Kraus operators must be square")]
    NotSquare,
    #[error("relative spectrum is not finite")]
    NotFinite,
    #[error("relative spectrum could not be enumerated: {0}")]
    SpectrumUndetermined(String),
    #[error("operation requires a complex channel")]
    WrongField,
    #[error("outer products are not linearly independent")]
    NotIndependent,
    #[error("identity lies in the span of a proper subset of the observables (missing index {0})")]
    SpanConditionFailed(usize),
    #[error("frame is not phase retrievable")]
    NotPhaseRetrievableFrame,
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("could not sample linearly independent outer products after {0} attempts")]
    DependentOuterProducts(usize),
    #[error("could not extend to a phase retrievable frame after {0} draws")]
    FrameExtensionFailed(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
