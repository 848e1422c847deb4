//! Crate-wide error type.

use std::path::PathBuf;

use crate::wav_io::WavError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Wav(#[from] WavError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("sidecar {path} is missing")]
    MissingSidecar { path: PathBuf },

    #[error("sidecar {path} is not valid JSON metadata: {source}")]
    CorruptSidecar {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("unsupported sidecar format_version {found} (expected {expected})")]
    SidecarVersion { found: u32, expected: u32 },

    #[error("invalid sidecar metadata: {0}")]
    InvalidMeta(String),

    #[error("payload of {k} samples exceeds capacity {k_max} for this host")]
    Capacity { k: usize, k_max: usize },

    #[error("payload sample {index} = {value} is outside the +/-16 transform guard")]
    PayloadOverflow { index: usize, value: f64 },

    #[error("strict extraction: bin {index} read back as {value}, which has no logarithm")]
    StrictExtraction { index: usize, value: f64 },

    #[error("symmetric embedding left an imaginary residue of {residual:e}")]
    Realness { residual: f64 },

    #[error("input is empty")]
    EmptyInput,

    #[error("invalid clip: {0}")]
    InvalidClip(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("signal of {len} samples is shorter than one {frame_len}-sample frame")]
    TooShortForFrame { len: usize, frame_len: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("SNR is undefined for a zero-energy signal")]
    UndefinedSnr,

    #[error("correlation is undefined for a constant vector")]
    UndefinedCorrelation,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
