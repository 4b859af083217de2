use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate denominator in {0}")]
    DegenerateDenominator(&'static str),

    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),

    #[error("steady state is not unique: Liouvillian null space has dimension {0}")]
    SingularLiouvillian(usize),

    #[error("rank-deficient fit: {distinct} distinct samples, need at least {needed}")]
    RankDeficient { distinct: usize, needed: usize },

    #[error("{function} outside its domain: {reason}")]
    Domain { function: &'static str, reason: String },

    #[error("operator matrix dimension {0} is too small (need at least 2)")]
    Dimension(usize),

    #[error("energy polynomial is not cubic in the photon number (quartic residual {residual:e})")]
    NotCubic { residual: f64 },

    #[error("1 + chi vanishes at index {0}; refractive index branch undefined")]
    Branch(usize),

    #[error("grid too small: {got} points, need at least {needed}")]
    GridTooSmall { got: usize, needed: usize },

    #[error("grid is not strictly increasing at index {0}")]
    GridOrder(usize),

    #[error("pulse bandwidth {bandwidth:e} rad/s exceeds a third of the chi grid span {span:e} rad/s")]
    BandwidthExceedsGrid { bandwidth: f64, span: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("at kappa={kappa}, n_atoms={n_atoms}, delta={delta}: {source}")]
    AtGridPoint {
        kappa: f64,
        n_atoms: u64,
        delta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
