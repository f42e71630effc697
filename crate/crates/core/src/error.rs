use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot place {k} spikes with pairwise gaps > {min_sep} in {n} slots")]
    InfeasibleSeparation { n: usize, k: usize, min_sep: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("model is not stable (largest pole modulus {max_modulus:.6})")]
    Unstable { max_modulus: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("need more than {needed} measurements, got {m}")]
    InsufficientMeasurements { m: usize, needed: usize },

    #[error("matrix is rank deficient: numerical rank {rank} < {cols} columns")]
    RankDeficient { rank: usize, cols: usize },

    #[error("regressor matrix is ill-conditioned (cond(YᵀY) ≈ {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("problem too large for exhaustive search: {0}")]
    SizeLimit(String),

    #[error("constraints are infeasible: {0}")]
    Infeasible(String),

    #[error("residual ball radius {epsilon} is below the least-squares floor {floor}")]
    EpsilonBelowFloor { epsilon: f64, floor: f64 },

    #[error("exact open-boundary decoding needs the 2p boundary samples")]
    MissingBoundary,

    #[error("{0} sensing does not have the shift structure this regressor needs")]
    ShiftStructureRequired(&'static str),

    #[error("DOC equality system is infeasible (support/sign equalities with πᵀY = 0 have no solution)")]
    DocEqualitiesInfeasible,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
