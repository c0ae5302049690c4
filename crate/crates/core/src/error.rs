use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported operator order {0}, expected one of 2, 4, 6, 8")]
    UnsupportedOrder(usize),

    #[error("grid with {n} nodes is too small for order {order} (needs at least {min})")]
    GridTooSmall { order: usize, n: usize, min: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("field kind mismatch: {0}")]
    KindMismatch(String),

    #[error("operation requires a {expected}D grid, got {actual}D")]
    WrongDimension { expected: usize, actual: usize },

    #[error("operator validation failed: {0}")]
    InvalidOperator(String),

    #[error("expected a one-dimensional kernel, found dimension {0}")]
    NullspaceDimensionUnexpected(usize),

    #[error("vector is not in the image of D (oscillation component {component:.3e} exceeds tolerance {tolerance:.3e})")]
    NotInImage { component: f64, tolerance: f64 },

    #[error("matrix with {cols} columns is too large for the dense oracle (limit {limit})")]
    TooLarge { cols: usize, limit: usize },

    #[error("potential conditions violated: {0}")]
    ConditionsViolated(String),

    #[error("field is not divergence and curl free (div {div:.3e}, curl {curl:.3e}, relative)")]
    NotDivCurlFree { div: f64, curl: f64 },

    #[error("linear map failed its adjoint self-test (relative defect {0:.3e})")]
    AdjointMismatch(f64),

    #[error("Krylov solver stalled: {0}")]
    SolverStalled(String),

    #[error("non-finite value encountered in the Krylov iteration")]
    NonFiniteEncountered,

    #[error("malformed field data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
