use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("potential is not integrable: {0}")]
    NonIntegrable(String),

    #[error("scattering length is infinite: {0}")]
    InfiniteScatteringLength(String),

    #[error("tolerance not met: achieved error estimate {achieved:.3e} exceeds {requested:.3e} ({context})")]
    ToleranceNotMet {
        achieved: f64,
        requested: f64,
        context: String,
    },

    #[error("density too high: {0}")]
    DensityTooHigh(String),

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("Temple gap is not positive: G = {0:.6e}")]
    TempleGap(f64),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("singular evaluation: {0}")]
    Singularity(String),

    #[error("divergent moment: {0}")]
    DivergentMoment(String),

    #[error("unknown mode: {0}")]
    Mode(String),

    #[error("state size {size} exceeds budget {budget}")]
    Size { size: usize, budget: usize },

    #[error("extrapolation outside grid: {0}")]
    Extrapolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
