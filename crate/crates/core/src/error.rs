use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("box too small: {0}")]
    BoxTooSmall(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bessel order {0} must exceed -1/2")]
    BesselOrder(f64),

    #[error("under-resolved quadrature: {message} (suggested nodes: {suggested_nodes})")]
    UnderResolved {
        message: String,
        suggested_nodes: usize,
    },

    #[error("truncation too coarse: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    TruncationResidual { residual: f64, tolerance: f64 },

    #[error("time step too large: nonlinear phase {phase:.3e} per step exceeds 0.1; try dt <= {suggested_dt:.3e}")]
    PhaseCondition { phase: f64, suggested_dt: f64 },

    #[error("interval [{t1}, {t2}] not covered by trajectory")]
    IntervalNotCovered { t1: f64, t2: f64 },

    #[error("trajectory has {0} snapshots; at least {1} required")]
    TooFewSnapshots(usize, usize),

    #[error("exponent constraint violated: {0}")]
    Constraint(String),

    #[error("smallness regime left: {0}")]
    Smallness(String),

    #[error("too few trials: {0}")]
    TooFewTrials(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
