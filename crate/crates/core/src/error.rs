use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("points are {distance:.3e} m apart, below the {guard:.3e} m steering guard")]
    TooClose { distance: f64, guard: f64 },

    #[error("degenerate point pair: {0}")]
    DegeneratePair(String),

    #[error("unknown wall identifier {id} (environment has {count} walls)")]
    UnknownWall { id: usize, count: usize },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("channel has zero norm")]
    ZeroChannel,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("search region is empty: {0}")]
    EmptyRegion(String),

    #[error("no admissible candidate in search region")]
    NoCandidate,

    #[error("channel database has no sinks")]
    EmptyDatabase,

    #[error("invalid amplitude: {0}")]
    InvalidAmplitude(String),

    #[error("unsupported formatVersion {found} (expected {expected})")]
    Version { found: i64, expected: u32 },

    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed user input files (config, database,
    /// snapshot) as opposed to failures while running.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Schema { .. } | Error::Version { .. }
        )
    }
}
