use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("directory {} does not exist", .0.display())]
    MissingDirectory(PathBuf),

    #[error("no t####.png frames in {}", .0.display())]
    NoFrames(PathBuf),

    #[error("{}: frame indices are not contiguous (expected t{expected:04}, found t{found:04})", dir.display())]
    NonContiguous {
        dir: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("{}: frame is {found_w}x{found_h}, expected {width}x{height}", path.display())]
    MixedDimensions {
        path: PathBuf,
        width: usize,
        height: usize,
        found_w: usize,
        found_h: usize,
    },

    #[error("{}: unsupported image format ({detail}); expected 16-bit grayscale PNG", path.display())]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("{}: {message}", path.display())]
    Decode { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },

    #[error(transparent)]
    Data(#[from] flipforge_core::Error),

    #[error("{0}")]
    Invalid(String),

    #[error("{0}")]
    Usage(String),

    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn is_empty_bank(&self) -> bool {
        match self {
            Error::Data(flipforge_core::Error::EmptyBank) => true,
            Error::Stage { source, .. } => source.is_empty_bank(),
            _ => false,
        }
    }

    /// Process exit code: 1 usage, 2 data, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Io { .. } | Error::MissingDirectory(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
