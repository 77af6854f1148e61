use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Pixel buffer length does not match `width * height`.
    BufferSize {
        expected: usize,
        actual: usize,
    },
    IntensityOutOfRange {
        index: usize,
        value: f64,
    },
    EmptySequence,
    /// Frame indices must run 0..T-1 without gaps.
    NonContiguousFrames {
        expected: usize,
        found: usize,
    },
    MixedDimensions {
        t: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    DuplicateEvent {
        t: usize,
        x: f64,
        y: f64,
    },
    InvalidCoordinate {
        t: usize,
        x: f64,
        y: f64,
    },
    EventOutsideSequence {
        t: usize,
        x: f64,
        y: f64,
    },
    FrameOutOfRange {
        t: usize,
        frames: usize,
    },
    InvalidConfig(&'static str),
    EmptyBank,
    PasteOutOfBounds {
        x: f64,
        y: f64,
    },
    PatchSize {
        expected: usize,
        found: usize,
    },
    BadMagic,
    UnsupportedVersion(u32),
    PayloadSize {
        expected: usize,
        actual: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BufferSize { expected, actual } => {
                write!(f, "pixel buffer has {actual} values, expected {expected}")
            }
            Error::IntensityOutOfRange { index, value } => {
                write!(f, "intensity {value} at index {index} is outside [0, 1]")
            }
            Error::EmptySequence => write!(f, "sequence has no frames"),
            Error::NonContiguousFrames { expected, found } => {
                write!(f, "frame indices not contiguous: expected {expected}, found {found}")
            }
            Error::MixedDimensions { t, expected, found } => write!(
                f,
                "frame {t} is {}x{}, expected {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
            Error::DuplicateEvent { t, x, y } => write!(f, "duplicate event ({t}, {x}, {y})"),
            Error::InvalidCoordinate { t, x, y } => {
                write!(f, "event ({t}, {x}, {y}) has a negative or non-finite coordinate")
            }
            Error::EventOutsideSequence { t, x, y } => {
                write!(f, "event ({t}, {x}, {y}) does not fit the sequence")
            }
            Error::FrameOutOfRange { t, frames } => {
                write!(f, "frame pair ending at {t} is not available in {frames} frames")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::EmptyBank => write!(f, "crop bank is empty: no annotation is usable"),
            Error::PasteOutOfBounds { x, y } => {
                write!(f, "paste centre ({x}, {y}) is too close to the image border")
            }
            Error::PatchSize { expected, found } => {
                write!(f, "patch size {found} does not match {expected}")
            }
            Error::BadMagic => write!(f, "not a heatmap file (bad magic)"),
            Error::UnsupportedVersion(v) => write!(f, "unsupported heatmap format version {v}"),
            Error::PayloadSize { expected, actual } => {
                write!(f, "heatmap payload is {actual} bytes, header implies {expected}")
            }
        }
    }
}

impl core::error::Error for Error {}
