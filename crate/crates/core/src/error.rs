use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    /// The analytic two-chain machinery only applies to balanced legs.
    #[error("imbalanced legs (dt = {dt}, dgamma = {dg}): the two-chain decoupling does not apply")]
    ImbalancedParameters { dt: f64, dg: f64 },

    #[error("system size L = {0} must be even for this operation")]
    OddSize(usize),

    #[error("eigensolver failed to converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("empty spectrum")]
    EmptySpectrum,

    /// An effective hopping vanishes, so the diagonal similarity matrix is singular.
    #[error("similarity matrix is singular (|u| = {u_abs:e}, |v| = {v_abs:e})")]
    SingularGauge { u_abs: f64, v_abs: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rank sequence not certifiable: singular value gap {gap:.3e} below required ratio")]
    IllConditioned { gap: f64 },

    #[error("point is classified as {found}, expected {expected}")]
    WrongClass { expected: String, found: String },

    #[error("zero state vector")]
    ZeroState,

    #[error("eigenvectors were not computed")]
    MissingEigenvectors,

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("norm overflow at t = {time}")]
    Overflow { time: f64 },

    #[error("matrix too large for this operation: dim {dim} > {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("singular linear system")]
    Singular,

    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
