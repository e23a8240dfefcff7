//! Centered, unitary 2D DFT and detector models.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::frame::Frame;

/// Row-major complex grid sharing the frame's centered-origin convention.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    width: usize,
    height: usize,
    data: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(width: usize, height: usize, data: Vec<Complex64>) -> Result<Self> {
        if width < 2 || height < 2 || data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} field",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidFrame("non-finite complex value".into()));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_frame(frame: &Frame) -> Self {
        Self {
            width: frame.width(),
            height: frame.height(),
            data: frame.data().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, col: usize, row: usize) -> Complex64 {
        self.data[row * self.width + col]
    }

    pub fn real_part(&self) -> Frame {
        self.map_real(|z| z.re)
    }

    fn map_real(&self, f: impl Fn(Complex64) -> f64) -> Frame {
        Frame::from_parts_unchecked(self.width, self.height, self.data.iter().map(|&z| f(z)).collect())
    }
}

/// Natural index `k` holds centered index `(k + n/2) mod n`.
fn reorder(data: &[Complex64], width: usize, height: usize, to_natural: bool) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for k_row in 0..height {
        let c_row = (k_row + height / 2) % height;
        for k_col in 0..width {
            let c_col = (k_col + width / 2) % width;
            let (n, c) = (k_row * width + k_col, c_row * width + c_col);
            if to_natural {
                out[n] = data[c];
            } else {
                out[c] = data[n];
            }
        }
    }
    out
}

fn fft2_in_place(buf: &mut [Complex64], width: usize, height: usize, direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let row_fft: Arc<dyn Fft<f64>> = planner.plan_fft(width, direction);
    let col_fft: Arc<dyn Fft<f64>> = planner.plan_fft(height, direction);
    row_fft.process(buf);

    let mut t = vec![Complex64::new(0.0, 0.0); buf.len()];
    for r in 0..height {
        for c in 0..width {
            t[c * height + r] = buf[r * width + c];
        }
    }
    col_fft.process(&mut t);
    for c in 0..width {
        for r in 0..height {
            buf[r * width + c] = t[c * height + r];
        }
    }

    let scale = 1.0 / ((width * height) as f64).sqrt();
    for z in buf.iter_mut() {
        *z *= scale;
    }
}

fn transform(field: &[Complex64], width: usize, height: usize, direction: FftDirection) -> ComplexField {
    let mut buf = reorder(field, width, height, true);
    fft2_in_place(&mut buf, width, height, direction);
    ComplexField { width, height, data: reorder(&buf, width, height, false) }
}

/// Unitary 2D DFT with DC on the centered-origin pixel.
pub fn dft2_centered(frame: &Frame) -> ComplexField {
    let field = ComplexField::from_frame(frame);
    transform(&field.data, field.width, field.height, FftDirection::Forward)
}

/// Inverse of [`dft2_centered`].
pub fn idft2_centered(field: &ComplexField) -> ComplexField {
    transform(&field.data, field.width, field.height, FftDirection::Inverse)
}

pub fn magnitude(field: &ComplexField) -> Frame {
    field.map_real(|z| z.norm())
}

/// Squared modulus: the intensity a focal-plane detector records.
pub fn power_spectrum(field: &ComplexField) -> Frame {
    field.map_real(|z| z.norm_sqr())
}
