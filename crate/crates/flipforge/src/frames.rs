//! `t####.png` frame directories: 16-bit single-channel PNG, one file per frame.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use flipforge_core::image::{Frame, Sequence};

use crate::error::{Error, Result};

pub fn frame_file_name(t: usize) -> String {
    format!("t{t:04}.png")
}

fn frame_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('t')?.strip_suffix(".png")?;
    if digits.len() < 4 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Decode a 16-bit grayscale PNG into `(width, height, samples)`.
pub fn read_png16(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder.read_info().map_err(|e| Error::Decode {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    let info = reader.info();
    if info.bit_depth != png::BitDepth::Sixteen || info.color_type != png::ColorType::Grayscale {
        return Err(Error::UnsupportedFormat {
            path: path.to_owned(),
            detail: format!("{:?} {:?}", info.color_type, info.bit_depth),
        });
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(w * h * 2)];
    let frame = reader.next_frame(&mut buf).map_err(|e| Error::Decode {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    let samples = buf[..frame.buffer_size()]
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Ok((w, h, samples))
}

pub fn write_png16(path: &Path, width: usize, height: usize, samples: &[u16]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Sixteen);
    encoder.set_compression(png::Compression::Balanced);
    let encode_err = |e: png::EncodingError| match e {
        png::EncodingError::IoError(io) => Error::io(path, io),
        other => Error::Decode {
            path: path.to_owned(),
            message: other.to_string(),
        },
    };
    let mut writer = encoder.write_header().map_err(encode_err)?;
    let bytes: Vec<u8> = samples.iter().flat_map(|s| s.to_be_bytes()).collect();
    writer.write_image_data(&bytes).map_err(encode_err)?;
    writer.finish().map_err(encode_err)
}

pub fn read_frame(path: &Path, t: usize) -> Result<Frame> {
    let (w, h, raw) = read_png16(path)?;
    Ok(Frame::from_u16(w, h, t, &raw)?)
}

pub fn write_frame(frame: &Frame, path: &Path) -> Result<()> {
    write_png16(path, frame.width(), frame.height(), &frame.to_u16())
}

/// Load every `t####.png` in `dir`; indices must run from 0 without gaps.
pub fn load_sequence(dir: &Path) -> Result<Sequence> {
    if !dir.is_dir() {
        return Err(Error::MissingDirectory(dir.to_owned()));
    }
    let mut indexed: Vec<(usize, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if let Some(t) = entry.file_name().to_str().and_then(frame_index) {
            indexed.push((t, entry.path()));
        }
    }
    if indexed.is_empty() {
        return Err(Error::NoFrames(dir.to_owned()));
    }
    indexed.sort();
    let mut frames: Vec<Frame> = Vec::with_capacity(indexed.len());
    for (expected, (t, path)) in indexed.into_iter().enumerate() {
        if t != expected {
            return Err(Error::NonContiguous {
                dir: dir.to_owned(),
                expected,
                found: t,
            });
        }
        let frame = read_frame(&path, t)?;
        if let Some(first) = frames.first() {
            if !first.same_shape(&frame) {
                return Err(Error::MixedDimensions {
                    path,
                    width: first.width(),
                    height: first.height(),
                    found_w: frame.width(),
                    found_h: frame.height(),
                });
            }
        }
        frames.push(frame);
    }
    let name = dir
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("sequence")
        .to_owned();
    Ok(Sequence::new(name, frames)?)
}

pub fn save_sequence(seq: &Sequence, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for frame in seq.frames() {
        write_frame(frame, &dir.join(frame_file_name(frame.t())))?;
    }
    Ok(())
}
