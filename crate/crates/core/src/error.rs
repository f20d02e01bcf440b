use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}:{line}: negative edge weight {weight}", path.display())]
    NegativeWeight {
        path: PathBuf,
        line: usize,
        weight: f64,
    },

    #[error("empty graph after preprocessing")]
    EmptyGraph,

    #[error("invalid sampling distribution: {0}")]
    InvalidDistribution(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("column {0} of the transition-power matrix sums to zero")]
    DegenerateColumn(usize),

    #[error("non-finite parameter detected at epoch {epoch}, batch {batch}")]
    NonFinite { epoch: usize, batch: usize },

    #[error("link-prediction split infeasible: {0}")]
    SplitInfeasible(String),

    #[error("no embedding row for node {0:?}")]
    MissingNode(String),

    #[error("training set contains a single class")]
    SingleClass,

    #[error("labels: {0}")]
    Labels(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
