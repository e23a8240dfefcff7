use std::path::PathBuf;

/// Errors produced by the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("zero-power frame")]
    ZeroPowerFrame,

    #[error("zero-power signature")]
    ZeroPowerSignature,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("segment ({row}, {col}) out of bounds for {rows}x{cols} grid")]
    SegmentOutOfBounds { row: usize, col: usize, rows: usize, cols: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parameter mismatch: {0}")]
    ParamsMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("geometry violation: {0}")]
    Geometry(String),

    #[error("content clipped: {0}")]
    Clipped(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("empty peak set")]
    NoPeaks,

    #[error("tile {index}: {source}")]
    Tile {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed signature data: {0}")]
    Format(String),

    #[error("unsupported image format in {path}: {reason}")]
    UnsupportedImage { path: PathBuf, reason: String },

    #[error("cannot decode {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn in_tile(self, index: usize) -> Self {
        Error::Tile { index, source: Box::new(self) }
    }

    /// True for errors caused by bad parameters or configuration rather than data.
    pub fn is_config(&self) -> bool {
        match self {
            Error::InvalidParams(_) | Error::InvalidGrid(_) | Error::ParamsMismatch(_) => true,
            Error::Tile { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
