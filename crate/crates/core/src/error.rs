use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: unsupported encoding: {detail}", path.display())]
    UnsupportedEncoding { path: PathBuf, detail: String },

    #[error("unsupported sample rate {0} Hz (accepted: 8000, 16000, 22050, 44100, 48000)")]
    UnsupportedRate(u32),

    #[error("unsupported channel count {0} (accepted: 1 or 2)")]
    UnsupportedChannels(u16),

    #[error("zero-length audio")]
    EmptyAudio,

    #[error("sample {index} is {value}, outside the finite range [-1, 1]")]
    InvalidSample { index: usize, value: f64 },

    #[error("signal too short: {got} samples, need at least {need}")]
    TooShort { got: usize, need: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("feature extraction failed for {} recording(s): {}", failures.len(), summarize(failures))]
    Extraction {
        failures: Vec<(String, String)>,
        /// Whether any of the failures was a filesystem error.
        any_io: bool,
    },
}

fn summarize(failures: &[(String, String)]) -> String {
    failures
        .iter()
        .map(|(id, msg)| format!("{id}: {msg}"))
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Extraction { any_io: true, .. })
    }
}
