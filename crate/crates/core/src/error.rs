use crate::tensor::TensorShape;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left} vs {right}")]
    ShapeMismatch {
        op: &'static str,
        left: TensorShape,
        right: TensorShape,
    },

    #[error("{op} requires a square tensor (m = n), got {shape}")]
    NotSquare { op: &'static str, shape: TensorShape },

    #[error("tensor is not Hermitian: ||a - a^H|| = {deviation:e} exceeds tolerance {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("invalid shape {m}x{n}x{p}: every dimension must be positive")]
    InvalidShape { m: usize, n: usize, p: usize },

    #[error("expected {expected} entries for the shape, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite entry at ({i}, {j}, {k})")]
    NonFinite { i: usize, j: usize, k: usize },

    #[error("index ({i}, {j}, {k}) outside shape {shape}")]
    IndexOutOfRange {
        i: usize,
        j: usize,
        k: usize,
        shape: TensorShape,
    },

    #[error("eigenvalue {value} of transform slice {slice} lies outside the domain {domain}")]
    OutsideDomain {
        slice: usize,
        value: f64,
        domain: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("binary divergence D({c} || {d}) is infinite")]
    InfiniteDivergence { c: f64, d: f64 },

    #[error("hypothesis violated for {context}: {witness}")]
    Hypothesis { context: String, witness: String },

    #[error("tensor literal parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
