use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{AnnotationSet, Frame, MitosisEvent, Sequence};

/// Before/after patches cut around one annotated division.
#[derive(Debug, Clone, PartialEq)]
pub struct CropPair {
    size: usize,
    before: Vec<f64>,
    after: Vec<f64>,
    source: MitosisEvent,
}

impl CropPair {
    pub fn new(size: usize, before: Vec<f64>, after: Vec<f64>, source: MitosisEvent) -> Result<Self> {
        for patch in [&before, &after] {
            if patch.len() != size * size {
                return Err(Error::PatchSize {
                    expected: size * size,
                    found: patch.len(),
                });
            }
            if let Some((index, &value)) = patch.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
                return Err(Error::IntensityOutOfRange { index, value });
            }
        }
        Ok(Self {
            size,
            before,
            after,
            source,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn before_patch(&self) -> &[f64] {
        &self.before
    }

    pub fn after_patch(&self) -> &[f64] {
        &self.after
    }

    pub fn source_event(&self) -> &MitosisEvent {
        &self.source
    }
}

/// Usable crops plus the annotations that had to be skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct CropBank {
    pub crops: Vec<CropPair>,
    pub skipped: Vec<MitosisEvent>,
}

/// Top-left corner of the `size`-wide window centred on `(x, y)` rounded to
/// the nearest pixel, or `None` when the window would leave the frame.
pub fn window_origin(x: f64, y: f64, size: usize, width: usize, height: usize) -> Option<(usize, usize)> {
    let half = (size / 2) as f64;
    let (cx, cy) = (libm::round(x), libm::round(y));
    let fits = |c: f64, extent: usize| c >= half && c + half <= extent as f64;
    (cx.is_finite() && cy.is_finite() && fits(cx, width) && fits(cy, height))
        .then_some(((cx - half) as usize, (cy - half) as usize))
}

fn crop(frame: &Frame, x0: usize, y0: usize, size: usize) -> Vec<f64> {
    frame.window(x0, y0, size)
}

/// Cut `size`x`size` patches from `I_{t-1}` and `I_t` around every usable
/// annotation. Events too close to a border or outside `1..T` are skipped.
pub fn build_crop_bank(seq: &Sequence, labels: &AnnotationSet, size: usize) -> Result<CropBank> {
    if size < 2 || !size.is_multiple_of(2) {
        return Err(Error::InvalidConfig("crop size must be even"));
    }
    let mut crops = Vec::new();
    let mut skipped = Vec::new();
    for event in labels.events() {
        let origin = if event.t >= 1 && event.t < seq.len() {
            window_origin(event.x, event.y, size, seq.width(), seq.height())
        } else {
            None
        };
        match origin {
            Some((x0, y0)) => {
                let before = crop(&seq.frames()[event.t - 1], x0, y0, size);
                let after = crop(&seq.frames()[event.t], x0, y0, size);
                crops.push(CropPair {
                    size,
                    before,
                    after,
                    source: *event,
                });
            }
            None => skipped.push(*event),
        }
    }
    if crops.is_empty() {
        return Err(Error::EmptyBank);
    }
    Ok(CropBank { crops, skipped })
}
