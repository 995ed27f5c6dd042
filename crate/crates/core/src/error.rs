use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("chart is degenerate at y = ({y1}, {y2}): |a_1 x a_2| = {cross_norm:e}")]
    DegenerateChart { y1: f64, y2: f64, cross_norm: f64 },

    #[error("thickness too large: det(g_1, g_2, g_3) = {det:e} at y = ({y1}, {y2}), x3 = {x3}, eps = {eps}")]
    ThicknessTooLarge {
        y1: f64,
        y2: f64,
        x3: f64,
        eps: f64,
        det: f64,
    },

    #[error("chart does not provide third derivatives, which {what} requires")]
    RegularityUnavailable { what: &'static str },

    #[error("invalid material parameters: {0}")]
    InvalidMaterial(String),

    #[error("tensor is not elliptic: minimum sampled contraction {minimum:e}")]
    NonElliptic { minimum: f64 },

    #[error("invalid scaling parameter eps = {0}")]
    InvalidEpsilon(f64),

    #[error("second derivatives are not available for this field")]
    SecondDerivativeUnavailable,

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("invalid decay rate k = {0}")]
    InvalidDecayRate(f64),

    #[error("history length {got} does not match the time grid ({expected} nodes)")]
    HistoryLength { expected: usize, got: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("meshes are incompatible: {0}")]
    IncompatibleMesh(String),

    #[error("vector length {got} does not match {expected} degrees of freedom")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("membrane form has a nontrivial discrete kernel (sigma_min = {sigma_min:e}, |K_a| = {norm:e})")]
    SecondKind { sigma_min: f64, norm: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
