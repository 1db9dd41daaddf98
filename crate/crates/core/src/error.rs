use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {x:?} lies outside the domain of {label}")]
    Domain { label: String, x: Vec<f64> },
    #[error("tangent vector norm {norm:e} is below the floor {floor:e}")]
    DegenerateTangent { norm: f64, floor: f64 },
    #[error("metric tensor is not positive definite at x={x:?}, y={y:?}")]
    NotPositiveDefinite { x: Vec<f64>, y: Vec<f64> },
    #[error("flag direction is g-parallel to the reference vector")]
    DegenerateFlag,
    #[error("expected a vector of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operation requires dimension {required}, metric has dimension {got}")]
    Dimension { required: usize, got: usize },
    #[error("need at least {needed} samples, trajectory has {have}")]
    InsufficientSamples { needed: usize, have: usize },
    #[error("initial data not admissible: {0}")]
    NotAdmissible(String),
    #[error("frame hint is degenerate: {0}")]
    DegenerateHint(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("unknown differentiation backend `{0}`")]
    UnknownBackend(String),
    #[error("closed-form interval exhausted at s={s}: {reason}")]
    IntervalExhausted { s: f64, reason: String },
    #[error("reconstruction failed at sample {index} (s={s}): {reason}")]
    ReconstructionFailure { index: usize, s: f64, reason: String },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
