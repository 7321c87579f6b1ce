use thiserror::Error;

/// Errors raised by the geometry and soliton pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("domain error in `{node}` at {point:?}: {reason}")]
    Domain {
        node: String,
        point: Vec<f64>,
        reason: String,
    },

    #[error("point has {got} coordinates, chart has {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular metric at {point:?} (|det| = {det:e})")]
    SingularMetric { point: Vec<f64>, det: f64 },

    #[error("signature mismatch at {point:?}: expected {expected}, found {found}")]
    SignatureMismatch {
        point: Vec<f64>,
        expected: String,
        found: String,
    },

    #[error("warping function is not positive at {point:?} (value {value:e})")]
    NonPositiveWarping { point: Vec<f64>, value: f64 },

    #[error("eta' is not positive at y = {y} (value {value:e})")]
    NonPositiveEtaPrime { y: f64, value: f64 },

    #[error("quadrature failed on [{a}, {b}]: {reason}")]
    QuadratureFailure { a: f64, b: f64, reason: String },

    #[error("fiber scalar curvature is not constant (spread {spread:e})")]
    NonConstantFiberCurvature { spread: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
