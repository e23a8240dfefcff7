//! Grayscale image ingest and heatmap output.

use std::fs;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;

/// Loads an 8- or 16-bit grayscale PGM or PNG, scaled linearly to [0, 1].
pub fn load_frame(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let format = image::guess_format(&bytes).map_err(|e| Error::Image { path: path.into(), source: e })?;
    if !matches!(format, image::ImageFormat::Png | image::ImageFormat::Pnm) {
        return Err(Error::UnsupportedImage {
            path: path.into(),
            reason: format!("{format:?} is not PGM or PNG"),
        });
    }
    let img = image::load_from_memory_with_format(&bytes, format)
        .map_err(|e| Error::Image { path: path.into(), source: e })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::UnsupportedImage { path: path.into(), reason: "zero-dimension image".into() });
    }
    let data: Vec<f64> = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
        other => {
            return Err(Error::UnsupportedImage {
                path: path.into(),
                reason: format!("color type {:?} is not grayscale", other.color()),
            })
        }
    };
    Frame::new(w, h, data).map_err(|e| Error::UnsupportedImage { path: path.into(), reason: e.to_string() })
}

/// Linear mapping used to quantize a heatmap: byte 0 is `min`, byte 255 is `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatmapScale {
    pub width: usize,
    pub height: usize,
    pub min: f64,
    pub max: f64,
}

/// Encodes a frame as 8-bit binary PGM, min/max scaled.
pub fn encode_pgm(frame: &Frame) -> (Vec<u8>, HeatmapScale) {
    let (min, max) = (frame.min(), frame.max());
    let span = max - min;
    let mut out = format!("P5\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend(frame.data().iter().map(|&v| {
        if span > 0.0 {
            ((v - min) / span * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    let scale = HeatmapScale { width: frame.width(), height: frame.height(), min, max };
    (out, scale)
}

pub fn write_pgm(frame: &Frame, path: impl AsRef<Path>) -> Result<HeatmapScale> {
    let path = path.as_ref();
    let (bytes, scale) = encode_pgm(frame);
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    Ok(scale)
}

/// Writes a PGM plus a `<name>.json` sidecar holding the scale.
pub fn write_heatmap(frame: &Frame, path: impl AsRef<Path>) -> Result<HeatmapScale> {
    let path = path.as_ref();
    let scale = write_pgm(frame, path)?;
    let sidecar = path.with_extension("json");
    let json = serde_json::to_string_pretty(&scale).expect("scale serializes");
    fs::write(&sidecar, json + "\n").map_err(|e| Error::io(&sidecar, e))?;
    Ok(scale)
}

/// Writes a 16-bit grayscale PNG, clamping values to [0, 1].
pub fn write_png16(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let raw: Vec<u16> = frame
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16)
        .collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(frame.width() as u32, frame.height() as u32, raw).expect("buffer size matches");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::Image { path: path.into(), source: e })
}
