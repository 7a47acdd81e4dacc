use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponent profile: {0}")]
    InvalidProfile(String),

    #[error("degenerate embedding: gamma = {gamma} must exceed p = {p}")]
    DegenerateEmbedding { gamma: f64, p: f64 },

    #[error("b(t) evaluated at its pole t = {0}")]
    Pole(f64),

    #[error("the limit equation is linear for ell = N - 2; use the closed form")]
    LinearLimitCase,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid grid function: {0}")]
    InvalidGrid(String),

    #[error("empty domain: {0}")]
    EmptyDomain(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("iteration diverged: {0}")]
    Divergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
