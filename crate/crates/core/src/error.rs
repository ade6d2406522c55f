use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Ingest { line: u64, message: String },

    #[error("no records")]
    NoRecords,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("layer `{layer}`: clique count {count} exceeds the ceiling of {limit}")]
    CliqueLimit { layer: String, count: usize, limit: usize },

    #[error("layer sets differ: {0}")]
    LayerMismatch(String),

    #[error("too few snapshots: {found} observed, at least {required} required")]
    TooFewSnapshots { found: usize, required: usize },

    #[error("series too short: length {len}, at least {required} required")]
    SeriesTooShort { len: usize, required: usize },

    #[error("snapshot t={time}, layer `{layer}`")]
    Context {
        time: u64,
        layer: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True when the failure was a resource ceiling rather than bad data.
    pub fn is_resource_limit(&self) -> bool {
        match self {
            Error::CliqueLimit { .. } => true,
            Error::Context { source, .. } => source.is_resource_limit(),
            _ => false,
        }
    }
}
