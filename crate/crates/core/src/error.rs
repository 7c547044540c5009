use thiserror::Error;

/// Every failure mode of the geometry pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("field is not evaluable in a neighborhood of the point")]
    NonSmoothPoint,
    #[error("tangent vector is zero")]
    DegenerateDirection,
    #[error("no stable finite-difference step found")]
    StepUnderflow,
    #[error("metric matrix is singular or not positive definite")]
    SingularMetric,
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("(s, sbar) = ({s}, {sbar}) outside the kernel rectangle (-{b0}, {b0}) x (-{g0}, {g0})")]
    OutOfDomain { s: f64, sbar: f64, b0: f64, g0: f64 },
    #[error("Pi = {0:e} is numerically zero")]
    DegeneratePi(f64),
    #[error("Gamma = {0:e} is numerically zero")]
    DegenerateGamma(f64),
    #[error("alpha vanishes along the direction")]
    NullDirection,
    #[error("admissibility grid has no nodes")]
    EmptyGrid,
    #[error("kernel is not positive on its declared rectangle: Psi({s}, {sbar}) = {value}")]
    NonPositiveKernel { s: f64, sbar: f64, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported derivative order {0}")]
    UnsupportedOrder(usize),
    #[error("expression error: {0}")]
    Expression(String),
    #[error("invalid config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
