use super::crop::{window_origin, CropPair};
use super::mask::BlendMask;
use super::FramePair;
use crate::error::{Error, Result};
use crate::image::{Frame, Point};

/// How a crop is composited onto the target pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PasteMode {
    /// `out = (1 - alpha) * target + alpha * crop` under a feathered mask.
    #[default]
    Alpha,
    /// Patch pixels overwrite the target window.
    Direct,
}

/// `(1 - alpha) * target + alpha * patch`, kept inside the segment between
/// the two inputs; rounding can otherwise land one ulp outside it.
pub fn blend(target: f64, patch: f64, alpha: f64) -> f64 {
    let v = (1.0 - alpha) * target + alpha * patch;
    v.clamp(target.min(patch), target.max(patch))
}

fn composite(frame: &mut Frame, patch: &[f64], mask: Option<&BlendMask>, x0: usize, y0: usize, size: usize) {
    let width = frame.width();
    let data = frame.data_mut();
    for py in 0..size {
        for px in 0..size {
            let i = (y0 + py) * width + x0 + px;
            let src = patch[py * size + px];
            data[i] = match mask {
                Some(m) => blend(data[i], src, m.get(px, py)),
                None => src,
            };
        }
    }
}

/// In-place variant of [`paste_event`]; returns the centre actually used.
pub fn paste_in_place(
    pair: &mut FramePair,
    crop: &CropPair,
    mask: &BlendMask,
    center: Point,
    mode: PasteMode,
) -> Result<Point> {
    let size = crop.size();
    if mode == PasteMode::Alpha && mask.size() != size {
        return Err(Error::PatchSize {
            expected: size,
            found: mask.size(),
        });
    }
    let (w, h) = (pair.before.width(), pair.before.height());
    let (x0, y0) = window_origin(center.x, center.y, size, w, h).ok_or(Error::PasteOutOfBounds {
        x: center.x,
        y: center.y,
    })?;
    let mask = (mode == PasteMode::Alpha).then_some(mask);
    composite(&mut pair.before, crop.before_patch(), mask, x0, y0, size);
    composite(&mut pair.after, crop.after_patch(), mask, x0, y0, size);
    let half = size / 2;
    Ok(Point::new((x0 + half) as f64, (y0 + half) as f64))
}

/// Paste `crop` into both frames of `pair`, centred on `center` rounded to
/// the nearest pixel. Pixels outside the crop window are left untouched.
pub fn paste_event(
    pair: &FramePair,
    crop: &CropPair,
    mask: &BlendMask,
    center: Point,
    mode: PasteMode,
) -> Result<FramePair> {
    let mut out = pair.clone();
    paste_in_place(&mut out, crop, mask, center, mode)?;
    Ok(out)
}
