use std::path::PathBuf;

use serde::Serialize;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Malformed input file; `location` points into the document.
    #[error("{path}: {location}: {message}")]
    Parse { path: PathBuf, location: String, message: String },
    #[error("{path}: unrecognized {kind} schema; fields found: [{}]", found.join(", "))]
    Adapter { path: PathBuf, kind: String, found: Vec<String> },
    /// Inputs that are individually valid but do not fit together.
    #[error("{0}")]
    Mismatch(String),
    #[error("{0}")]
    Data(dgsp_core::Error),
    #[error("{0}")]
    Training(dgsp_core::Error),
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Adapter { .. } => "adapter",
            Error::Mismatch(_) => "mismatch",
            Error::Data(_) => "data",
            Error::Training(_) => "training",
            Error::Csv { .. } => "io",
        }
    }

    /// 1 usage, 2 data, 3 training or evaluation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Mismatch(_) => 1,
            Error::Io { .. } | Error::Parse { .. } | Error::Adapter { .. } | Error::Data(_) | Error::Csv { .. } => 2,
            Error::Training(_) => 3,
        }
    }

    /// One-line JSON rendering for the diagnostic stream.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            code: i32,
            message: String,
        }
        let line = Line { error: self.kind(), code: self.exit_code(), message: self.to_string().replace('\n', " ") };
        serde_json::to_string(&line).expect("string fields serialize")
    }
}

/// Core errors raised while reading data are data errors.
impl From<dgsp_core::Error> for Error {
    fn from(e: dgsp_core::Error) -> Self {
        match e {
            dgsp_core::Error::Diverged { .. } => Error::Training(e),
            dgsp_core::Error::Config(_) => Error::Usage(e.to_string()),
            other => Error::Data(other),
        }
    }
}
