use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Division by zero, a branch cut, or an exhausted jet order.
    #[error("singular point: {0}")]
    Singular(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("point ({x}, {y}) lies outside the admissible domain {domain}")]
    OutsideDomain { x: f64, y: f64, domain: String },

    #[error("not strictly pseudoconvex at ({x}, {y}): F_zzbar = {value}")]
    NotPseudoconvex { x: f64, y: f64, value: f64 },

    #[error("gauge singularity: {0}")]
    Gauge(String),

    #[error("invalid lift profile: {0}")]
    Profile(String),

    #[error("coordinate singularity of the conformal factor at r = {r} (|cos((r+s)/2)| = {cos})")]
    GuardBand { r: f64, cos: f64 },

    #[error("degenerate metric: |det g| = {0}")]
    DegenerateMetric(f64),

    #[error("solver failed: {msg}")]
    Solver { msg: String, history: Vec<f64> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
