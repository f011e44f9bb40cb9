use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("(delta={delta}, epsilon={epsilon}, r={r}, s={s}, tau={tau}) is not an admissible case")]
    InvalidCase {
        delta: i32,
        epsilon: i32,
        r: i32,
        s: i32,
        tau: i32,
    },
    #[error("phi={phi} is outside the admissible range {range} of case {case}")]
    PhiOutOfRange { phi: f64, case: u8, range: &'static str },
    #[error("grid too small: need at least {needed} nodes per axis, got {got}")]
    GridTooSmall { needed: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("seed kind {kind} is not defined for case {case}")]
    UnknownSpec { kind: String, case: u8 },
    #[error("point ({0}, {1}) is not a grid node")]
    SeedNotOnGrid(f64, f64),
    #[error("alpha is undefined at the starting node ({0}, {1})")]
    AlphaUndefinedOnGrid(f64, f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("superposition needs phi1 != phi2 (both are {0})")]
    EqualPhis(f64),
    #[error("case {case} does not belong to the {family} family")]
    WrongCaseFamily { case: u8, family: &'static str },
    #[error("phi={0} appears twice in the lattice parameters")]
    DuplicatePhi(f64),
    #[error("the grid contains the singular axis x1 = 0")]
    GridContainsSingularAxis,
    #[error("induced metric is degenerate at every node")]
    DegenerateMetric,
    #[error("alpha makes the transformation singular at every node")]
    DegenerateAlpha,
    #[error("config: {0}")]
    Config(String),
    #[error("parse error in {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
