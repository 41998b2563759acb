use std::fmt;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage that failed to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Stage {
    Lasso,
    Ensembler,
    Isotonic,
    Combination,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Lasso => "LASSO",
            Stage::Ensembler => "ensembler",
            Stage::Isotonic => "isotonic",
            Stage::Combination => "combination",
        };
        f.write_str(s)
    }
}

/// Coarse error classes, used by the CLI to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Data,
    Usage,
    Training,
    Internal,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{stage} stage: {message}")]
    Training { stage: Stage, message: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error("corrupt state file: {0}")]
    CorruptState(String),

    #[error("state schema version {found} is not supported (expected {expected}); migration required")]
    MigrationRequired { found: u32, expected: u32 },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),

    /// A failure inside one node of the model graph.
    #[error("{node} model{}: {source}", horizon_hour.map(|h| format!(" (horizon hour {h})")).unwrap_or_default())]
    Node {
        node: String,
        horizon_hour: Option<usize>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn training(stage: Stage, msg: impl Into<String>) -> Self {
        Error::Training {
            stage,
            message: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// The innermost error, past any node wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Node { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Input(_)
            | Error::Parse { .. }
            | Error::CorruptState(_)
            | Error::MigrationRequired { .. }
            | Error::Io { .. } => ErrorKind::Data,
            Error::Config(_) => ErrorKind::Usage,
            Error::Training { .. } => ErrorKind::Training,
            Error::Internal(_) => ErrorKind::Internal,
            Error::Node { source, .. } => source.kind(),
        }
    }
}
