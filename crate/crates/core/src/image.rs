//! Frames, sequences and point annotations.
//!
//! Intensities are `f64` in `[0, 1]`, stored row-major. Coordinates follow
//! the image convention: `x` is the column, `y` the row, and integer values
//! address pixel centres with the origin at the top-left pixel.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Map a raw 16-bit sample onto `[0, 1]`.
pub fn normalize_u16(raw: u16) -> f64 {
    f64::from(raw) / 65535.0
}

/// Nearest 16-bit sample for an intensity; values outside `[0, 1]` saturate.
pub fn quantize_u16(value: f64) -> u16 {
    libm::round(value.clamp(0.0, 1.0) * 65535.0) as u16
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

/// One grayscale image of a time-lapse.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    t: usize,
    data: Vec<f64>,
}

impl Frame {
    pub fn new(width: usize, height: usize, t: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: data.len(),
            });
        }
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::IntensityOutOfRange { index, value });
        }
        Ok(Self { width, height, t, data })
    }

    pub fn filled(width: usize, height: usize, t: usize, value: f64) -> Result<Self> {
        Self::new(width, height, t, alloc::vec![value; width * height])
    }

    pub fn from_u16(width: usize, height: usize, t: usize, raw: &[u16]) -> Result<Self> {
        Self::new(width, height, t, raw.iter().copied().map(normalize_u16).collect())
    }

    pub fn to_u16(&self) -> Vec<u16> {
        self.data.iter().copied().map(quantize_u16).collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.t = t;
        self
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn same_shape(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Copy the `size`x`size` window whose top-left pixel is `(x0, y0)`.
    ///
    /// The window must lie inside the frame.
    pub fn window(&self, x0: usize, y0: usize, size: usize) -> Vec<f64> {
        debug_assert!(x0 + size <= self.width && y0 + size <= self.height);
        let mut out = Vec::with_capacity(size * size);
        for row in y0..y0 + size {
            let start = row * self.width + x0;
            out.extend_from_slice(&self.data[start..start + size]);
        }
        out
    }
}

/// An ordered time-lapse; frame `i` has `t == i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    name: String,
    frames: Vec<Frame>,
}

impl Sequence {
    pub fn new(name: impl Into<String>, frames: Vec<Frame>) -> Result<Self> {
        let first = frames.first().ok_or(Error::EmptySequence)?;
        let dims = (first.width, first.height);
        for (i, f) in frames.iter().enumerate() {
            if f.t != i {
                return Err(Error::NonContiguousFrames {
                    expected: i,
                    found: f.t,
                });
            }
            if (f.width, f.height) != dims {
                return Err(Error::MixedDimensions {
                    t: f.t,
                    expected: dims,
                    found: (f.width, f.height),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            frames,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, t: usize) -> Option<&Frame> {
        self.frames.get(t)
    }

    /// Number of frames, `T`.
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }
}

/// A cell division at `(x, y)`, seen across the frame pair `(t - 1, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MitosisEvent {
    pub t: usize,
    pub x: f64,
    pub y: f64,
}

impl MitosisEvent {
    pub fn new(t: usize, x: f64, y: f64) -> Self {
        Self { t, x, y }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }

    /// Whether the event can be observed in `seq`.
    pub fn fits(&self, seq: &Sequence) -> bool {
        self.t >= 1
            && self.t < seq.len()
            && self.x >= 0.0
            && self.x < seq.width() as f64
            && self.y >= 0.0
            && self.y < seq.height() as f64
    }
}

/// Point annotations for one sequence; either partial labels or ground truth.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotationSet {
    sequence: String,
    events: Vec<MitosisEvent>,
}

impl AnnotationSet {
    /// Rejects negative or non-finite coordinates and exact duplicates.
    pub fn new(sequence: impl Into<String>, events: Vec<MitosisEvent>) -> Result<Self> {
        for (i, e) in events.iter().enumerate() {
            if !(e.x.is_finite() && e.y.is_finite()) || e.x < 0.0 || e.y < 0.0 {
                return Err(Error::InvalidCoordinate { t: e.t, x: e.x, y: e.y });
            }
            if events[..i].iter().any(|o| o == e) {
                return Err(Error::DuplicateEvent { t: e.t, x: e.x, y: e.y });
            }
        }
        Ok(Self {
            sequence: sequence.into(),
            events,
        })
    }

    pub(crate) fn from_parts_unchecked(sequence: String, events: Vec<MitosisEvent>) -> Self {
        Self { sequence, events }
    }

    pub fn sequence_name(&self) -> &str {
        &self.sequence
    }

    pub fn events(&self) -> &[MitosisEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Check every event against the bounds of `seq`.
    pub fn validate_against(&self, seq: &Sequence) -> Result<()> {
        match self.events.iter().find(|e| !e.fits(seq)) {
            Some(e) => Err(Error::EventOutsideSequence { t: e.t, x: e.x, y: e.y }),
            None => Ok(()),
        }
    }
}
