use thiserror::Error;

/// Errors produced by the beamflat library.
#[derive(Debug, Error)]
pub enum BeamError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite sample encountered in {0}")]
    NonFinite(String),

    #[error("state not in Z-tilde: |u(L)| = {u_at_l:.3e} exceeds tolerance {tol:.3e}")]
    NotInTildeZ { u_at_l: f64, tol: f64 },

    #[error("input f(0) = {f0:.6e} is not compatible with u(L) = {u_at_l:.6e}")]
    Incompatible { f0: f64, u_at_l: f64 },

    #[error("jet order {got} too small, need at least {need}")]
    JetOrderTooSmall { got: usize, need: usize },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("truncation level {n} exceeds table depth {k}")]
    TruncationTooDeep { n: usize, k: usize },

    #[error("series truncation insufficient at |lambda| = {lambda_abs:.3e}: relative tail {tail:.3e}")]
    TruncationInsufficient { lambda_abs: f64, tail: f64 },

    #[error("simulation diverged at step {step} (t = {t:.6})")]
    Diverged { step: usize, t: f64 },

    #[error("rank-deficient projection basis (condition number {cond:.3e})")]
    RankDeficient { cond: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, BeamError>;
