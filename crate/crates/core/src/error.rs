use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline, from file loading through the
/// numerical solves. Each variant maps to exactly one rejection class so a
/// bad input file fails with one unambiguous diagnosis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("accounting balance violated: {0}")]
    Balance(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("household group set invalid: {0}")]
    GroupSet(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unknown sector '{0}'")]
    UnknownSector(String),

    #[error("missing sector '{0}'")]
    MissingSector(String),

    #[error("negative emission intensity for sector '{0}'")]
    NegativeIntensity(String),

    #[error("consumption share for group '{group}' is {share}, above 1")]
    ConsumptionShare { group: String, share: f64 },

    #[error("degenerate sector '{0}': zero output against nonzero flows")]
    DegenerateSector(String),

    #[error("group '{0}' has zero income but nonzero consumption")]
    ZeroIncome(String),

    #[error("economy is not productive: {0}")]
    NonProductive(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("total income is zero")]
    ZeroTotalIncome,

    #[error("group sets differ: {0}")]
    GroupMismatch(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Process exit code for the CLI: 1 validation, 2 numerical, 3 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonProductive(_) | Error::Singular(_) => 2,
            Error::MissingFile(_) | Error::Io { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
