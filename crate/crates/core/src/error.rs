use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("power must be at least 1")]
    ZeroPower,

    #[error("PDE truncation order must be at least 2, got {0}")]
    OrderTooSmall(usize),

    #[error("moments unavailable: stored order {stored} is below requested order {requested}")]
    MomentsUnavailable { stored: usize, requested: usize },

    #[error("characteristic function unavailable for moment-only nonlocality data")]
    CharFnUnavailable,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(
        "kernel mass at domain boundary is {fraction:.3e} of peak (threshold {threshold:.1e}); \
         enlarge the spatial domain"
    )]
    BoundaryMass { fraction: f64, threshold: f64 },

    #[error("numerical instability: sup-norm grew by {growth:.2}x in one time step")]
    Unstable { growth: f64 },

    #[error("velocity {xdot} outside log domain: eps*xdot/sigma^2 must exceed -1 (bound {bound})")]
    LogDomain { xdot: f64, bound: f64 },

    #[error("series exponent must have zero constant term")]
    NonzeroConstantTerm,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
