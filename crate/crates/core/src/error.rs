use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cutoff {0}: must be finite and >= 1")]
    InvalidCutoff(f64),

    #[error("unknown group '{0}' (expected \"torus:r\" or \"su2\")")]
    UnknownGroup(String),

    #[error("representation index {index} is not valid for group {group}")]
    IndexMismatch { group: String, index: String },

    #[error("cannot parse representation index '{0}'")]
    BadIndex(String),

    #[error("missing representation {0}")]
    MissingRepresentation(String),

    #[error("wrong block size at {index}: expected {expected}x{expected}, got {rows}x{cols}")]
    WrongBlockSize {
        index: String,
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("symbol '{symbol}' is not defined on group {group}")]
    SymbolGroupMismatch { symbol: String, group: String },

    #[error("invalid tail fraction {0}: must lie in (0, 1]")]
    InvalidTail(f64),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite matrix entries")]
    NonFinite,

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    #[error("{0}")]
    Undefined(String),

    #[error("no growth to fit: {0}")]
    NoGrowth(String),

    #[error("evaluation failed at {index}: {source}")]
    AtIndex {
        index: String,
        #[source]
        source: Box<Error>,
    },

    #[error("symbol '{0}' is not a polynomial multiplier")]
    NotPolynomial(String),

    #[error("coefficient support exceeds the grid band at {0}")]
    OutsideBand(String),

    #[error("config error at {at}: {msg}")]
    Config { at: String, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(at: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            at: at.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn at_index(index: impl std::fmt::Display, source: Error) -> Self {
        Error::AtIndex {
            index: index.to_string(),
            source: Box::new(source),
        }
    }
}
