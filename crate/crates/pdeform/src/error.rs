use thiserror::Error;

/// Errors raised by the engine. Validation failures are not errors; they are
/// reported as entries of a `ValidationReport`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("exponent {exponent} of variable {var} leaves the window [-{window}, {window}]")]
    WindowOverflow { var: String, exponent: i64, window: i64 },
    #[error("operands live in different variable contexts: {0}")]
    ContextMismatch(String),
    #[error("vector is not in the ambient space")]
    NotInSpace,
    #[error("multivectors live on different charts ({0} vs {1})")]
    ChartMismatch(String, String),
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("chart map has no usable inverse: {0}")]
    NoInverse(String),
    #[error("value cannot be transported: {0}")]
    TransportFailure(String),
    #[error("cohomology changes with the window: {0}")]
    WindowInsufficient(String),
    #[error("maps cannot be composed: {0}")]
    CompositionMismatch(String),
    #[error("family direction {0} is not a 1-cocycle")]
    NotACocycle(usize),
    #[error("operation needs the ring k[e]/(e^2), got {0}")]
    WrongRing(String),
    #[error("invalid deformation datum: {0}")]
    InvalidDatum(String),
    #[error("small extension does not match the datum: {0}")]
    ExtensionMismatch(String),
    #[error("hypothesis failed: {what} (rank {rank}, required {required})")]
    HypothesisFailed { what: String, rank: usize, required: usize },
    #[error("submanifold is not Poisson: {0}")]
    InvalidSubmanifold(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    SyntaxError { line: usize, column: usize, message: String },
    #[error("unresolved reference to `{0}`")]
    UnresolvedReference(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
