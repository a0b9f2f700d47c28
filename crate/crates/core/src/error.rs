use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("network file not found: {}", .0.display())]
    NetworkNotFound(PathBuf),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("asymmetric couplings between sites {0} and {1}")]
    AsymmetricCouplings(usize, usize),

    #[error("negative rate: {0}")]
    NegativeRate(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid site index {index} for a {n_sites}-site network")]
    InvalidSite { index: usize, n_sites: usize },

    #[error("empty site set")]
    EmptySiteSet,

    #[error("zero separation between dipoles")]
    ZeroSeparation,

    #[error("occupation undefined at zero frequency for finite temperature")]
    ZeroFrequency,

    #[error("supermatrix is not Hurwitz (spectral abscissa {0:e} ps^-1); enable loss or trapping")]
    NonHurwitz(f64),

    #[error("singular supermatrix")]
    Singular,

    #[error("times must be ascending and non-negative")]
    NonAscendingTimes,

    #[error("efficiency {0} outside [0, 1]")]
    EfficiencyOutOfRange(f64),

    #[error("unknown {kind} '{name}' (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },
}
