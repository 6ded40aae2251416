use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad measurement data: non-monotone timestamps, NaN values, negative sigma.
    #[error("invalid input: {0}")]
    Input(String),

    /// Tube construction preconditions not met.
    #[error("cannot build tube: {0}")]
    Construction(String),

    /// A query reached outside the tube's time domain.
    #[error("time {query} outside tube domain [{t0}, {tf}]")]
    Domain { query: String, t0: f64, tf: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("boundary not closed in domain: subpaving is partial")]
    BoundaryNotClosed,

    #[error("empty subpaving")]
    EmptySubpaving,

    /// An edge reached the degree computation without a sign tag.
    #[error("contour edge {index} is untagged")]
    UntaggedEdge { index: usize },

    #[error("invalid parameter: {0}")]
    Param(String),

    /// The winding oracle met a field sample too close to zero.
    #[error("field vanishes (|f| = {norm:e}) near ({t1}, {t2}) on the contour")]
    OracleNearZero { t1: f64, t2: f64, norm: f64 },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True for errors that signal a broken internal contract rather than
    /// bad input or configuration.
    pub fn is_invariant_violation(&self) -> bool {
        match self {
            Error::Stage { source, .. } => source.is_invariant_violation(),
            Error::BoundaryNotClosed | Error::EmptySubpaving | Error::UntaggedEdge { .. } | Error::Domain { .. } => true,
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
