use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid turn: {0}")]
    InvalidTurn(String),

    #[error("speaker {speaker} out of range for {n_speakers} speakers")]
    SpeakerOutOfRange { speaker: usize, n_speakers: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("modularity is undefined for a graph with zero total weight")]
    UndefinedModularity,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("partition enumeration refused for {0} nodes (limit is 10)")]
    TooManyNodes(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown policy `{0}` (expected N, BH, BS, CH or CS)")]
    UnknownPolicy(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
