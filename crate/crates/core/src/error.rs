use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("class column `{0}` not found in header")]
    MissingClassColumn(String),
    #[error("id column `{0}` not found in header")]
    MissingIdColumn(String),
    #[error("duplicate header name `{0}`")]
    DuplicateHeader(String),
    #[error("duplicate PSV name `{0}`")]
    DuplicatePsv(String),
    #[error("column `{0}` mixes binary (0/1) and categorical values")]
    MixedColumn(String),
    #[error("K ≥ 2 required, found {0} class(es)")]
    TooFewClasses(usize),
    #[error("class `{0}` is empty")]
    EmptyClass(String),
    #[error("dataset has no PSV columns")]
    NoPsvs,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("class index {index} out of range (K = {k})")]
    ClassOutOfRange { index: usize, k: usize },
    #[error("class {0} is the whole population; its complement is empty")]
    ClassIsPopulation(usize),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("invalid utility bounds: {0}")]
    InvalidBounds(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exhaustive search supports at most {max} PSVs, dataset has {m}")]
    TooManyPsvs { m: usize, max: usize },
    #[error("invalid set cover instance: {0}")]
    InvalidMsc(String),
    #[error("selected sets are not a valid cover: {0}")]
    NotACover(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid marginal spec: {0}")]
    InvalidSpec(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
