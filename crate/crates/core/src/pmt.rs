//! Polar Mellin transform: log-polar resampling of a centered spectrum.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Edge, Frame};
use crate::spectral::{dft2_centered, magnitude, power_spectrum};

pub const DEFAULT_R0: f64 = 10.0;
pub const DEFAULT_BINS: usize = 128;

/// Which detector turns the complex spectrum into the real map that gets resampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    /// Linear modulus |F|.
    Magnitude,
    /// Intensity |F|^2, as recorded by a focal-plane array.
    #[default]
    Intensity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmtParams {
    pub r0: f64,
    pub r_max: f64,
    pub n_rho: usize,
    pub n_theta: usize,
    #[serde(default)]
    pub detector: Detector,
}

impl PmtParams {
    pub fn new(r0: f64, r_max: f64, n_rho: usize, n_theta: usize) -> Result<Self> {
        let p = Self { r0, r_max, n_rho, n_theta, detector: Detector::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn with_detector(mut self, detector: Detector) -> Self {
        self.detector = detector;
        self
    }

    /// Defaults for a `width x height` segment: r0 = 10, r_max = min/2 - 1, 128 x 128 bins.
    pub fn for_dims(width: usize, height: usize) -> Result<Self> {
        let r_max = (width.min(height) / 2) as f64 - 1.0;
        Self::new(DEFAULT_R0, r_max, DEFAULT_BINS, DEFAULT_BINS)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0.is_finite() && self.r_max.is_finite()) {
            return Err(Error::InvalidParams("r0 and r_max must be finite".into()));
        }
        if self.r0 <= 0.0 {
            return Err(Error::InvalidParams(format!("r0 = {} must be > 0", self.r0)));
        }
        if self.r0 >= self.r_max {
            return Err(Error::InvalidParams(format!(
                "r0 = {} must be < r_max = {}",
                self.r0, self.r_max
            )));
        }
        if self.n_rho < 8 || self.n_theta < 8 {
            return Err(Error::InvalidParams(format!(
                "n_rho = {} and n_theta = {} must both be >= 8",
                self.n_rho, self.n_theta
            )));
        }
        Ok(())
    }

    /// Checks that the sampled annulus fits inside a `width x height` spectrum.
    pub fn validate_for(&self, width: usize, height: usize) -> Result<()> {
        self.validate()?;
        let half = width.min(height) as f64 / 2.0;
        if self.r_max > half {
            return Err(Error::InvalidParams(format!(
                "r_max = {} exceeds the inscribed half-extent {half} of a {width}x{height} frame",
                self.r_max
            )));
        }
        Ok(())
    }

    pub fn delta_rho(&self) -> f64 {
        (self.r_max / self.r0).ln() / self.n_rho as f64
    }

    pub fn delta_theta(&self) -> f64 {
        2.0 * PI / self.n_theta as f64
    }

    /// Radius sampled by column `p`.
    pub fn radius(&self, p: usize) -> f64 {
        self.r0 * ((p as f64 + 0.5) * self.delta_rho()).exp()
    }

    /// Angle sampled by row `t`, counterclockwise from +x.
    pub fn angle(&self, t: usize) -> f64 {
        (t as f64 + 0.5) * self.delta_theta()
    }
}

/// Unit-power log-polar signature: θ along rows, ρ along columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PmtSignature {
    params: PmtParams,
    data: Vec<f64>,
}

const MAGIC: &[u8; 4] = b"PMT1";
const HEADER_LEN: usize = 16;

impl PmtSignature {
    /// Wraps raw data after checking shape, sign, and unit power.
    pub fn from_data(params: PmtParams, data: Vec<f64>) -> Result<Self> {
        params.validate()?;
        if data.len() != params.n_rho * params.n_theta {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {}x{} bins",
                data.len(),
                params.n_rho,
                params.n_theta
            )));
        }
        if data.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Format("signature values must be finite and >= 0".into()));
        }
        let energy: f64 = data.iter().map(|v| v * v).sum();
        if (energy - 1.0).abs() > 1e-9 {
            return Err(Error::Format(format!("signature power {energy} is not 1")));
        }
        Ok(Self { params, data })
    }

    pub fn params(&self) -> &PmtParams {
        &self.params
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn n_rho(&self) -> usize {
        self.params.n_rho
    }

    pub fn n_theta(&self) -> usize {
        self.params.n_theta
    }

    #[inline]
    pub fn get(&self, t: usize, p: usize) -> f64 {
        self.data[t * self.params.n_rho + p]
    }

    pub fn theta_row(&self, t: usize) -> &[f64] {
        let n = self.params.n_rho;
        &self.data[t * n..(t + 1) * n]
    }

    pub fn to_frame(&self) -> Frame {
        Frame::from_parts_unchecked(self.params.n_rho, self.params.n_theta, self.data.clone())
    }

    /// `PMT1` header (magic, n_rho, n_theta, 4 reserved zero bytes) then LE f64 values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.params.n_rho as u32).to_le_bytes());
        out.extend_from_slice(&(self.params.n_theta as u32).to_le_bytes());
        out.extend_from_slice(&[0u8; 4]);
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses [`to_bytes`](Self::to_bytes) output. The header carries no radii, so
    /// `params` supplies them and must agree on the bin counts.
    pub fn from_bytes(bytes: &[u8], params: PmtParams) -> Result<Self> {
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(Error::Format("missing PMT1 header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
        let (n_rho, n_theta) = (word(4), word(8));
        if (n_rho, n_theta) != (params.n_rho, params.n_theta) {
            return Err(Error::ParamsMismatch(format!(
                "file holds {n_rho}x{n_theta} bins, params expect {}x{}",
                params.n_rho, params.n_theta
            )));
        }
        let body = &bytes[HEADER_LEN..];
        if body.len() != 8 * n_rho * n_theta {
            return Err(Error::Format(format!("body is {} bytes, expected {}", body.len(), 8 * n_rho * n_theta)));
        }
        let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Self::from_data(params, data)
    }
}

/// Resamples a centered spectrum map onto the (θ, ρ) grid and normalizes to unit power.
pub fn log_polar_transform(map: &Frame, params: &PmtParams) -> Result<PmtSignature> {
    params.validate_for(map.width(), map.height())?;
    let (n_rho, n_theta) = (params.n_rho, params.n_theta);
    let radii: Vec<f64> = (0..n_rho).map(|p| params.radius(p)).collect();
    let mut data = Vec::with_capacity(n_rho * n_theta);
    for t in 0..n_theta {
        let (s, c) = params.angle(t).sin_cos();
        for &r in &radii {
            // Spectra are nonnegative; clamp stray bilinear rounding.
            data.push(map.sample_bilinear(r * c, r * s, Edge::Clamp).max(0.0));
        }
    }
    let energy: f64 = data.iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(Error::ZeroPowerSignature);
    }
    let k = 1.0 / energy.sqrt();
    data.iter_mut().for_each(|v| *v *= k);
    Ok(PmtSignature { params: *params, data })
}

/// The detector map (magnitude or intensity) of the frame's centered spectrum.
pub fn spectrum_map(frame: &Frame, detector: Detector) -> Frame {
    let field = dft2_centered(frame);
    match detector {
        Detector::Magnitude => magnitude(&field),
        Detector::Intensity => power_spectrum(&field),
    }
}

pub fn pmt(frame: &Frame, params: &PmtParams) -> Result<PmtSignature> {
    params.validate_for(frame.width(), frame.height())?;
    log_polar_transform(&spectrum_map(frame, params.detector), params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PmtParams {
        PmtParams::new(3.0, 15.0, 16, 32).unwrap()
    }

    #[test]
    fn validation_names_the_constraint() {
        let e = PmtParams::new(5.0, 5.0, 16, 16).unwrap_err().to_string();
        assert!(e.contains("r0") && e.contains("r_max"), "{e}");
        assert!(PmtParams::new(0.0, 5.0, 16, 16).is_err());
        assert!(PmtParams::new(1.0, 5.0, 7, 16).is_err());
        let e = params().validate_for(20, 40).unwrap_err().to_string();
        assert!(e.contains("half-extent"), "{e}");
        assert!(params().validate_for(30, 32).is_ok());
    }

    #[test]
    fn bin_widths() {
        let p = PmtParams::new(3.0, 128.0, 128, 128).unwrap();
        assert!((p.delta_rho() - (128.0f64 / 3.0).ln() / 128.0).abs() < 1e-15);
        assert!((p.delta_rho() - 0.02933).abs() < 1e-5);
        assert!((p.delta_theta() - 2.0 * PI / 128.0).abs() < 1e-15);
    }

    #[test]
    fn constant_map_gives_flat_signature() {
        let map = Frame::new(32, 32, vec![2.5; 1024]).unwrap();
        let s = log_polar_transform(&map, &params()).unwrap();
        let want = 1.0 / ((16 * 32) as f64).sqrt();
        assert!(s.data().iter().all(|v| (v - want).abs() < 1e-14));
    }

    #[test]
    fn dc_only_is_blocked() {
        let map = Frame::from_fn(32, 32, |c, r| {
            let (x, y) = (c as f64 - 16.0, 16.0 - r as f64);
            if x.hypot(y) < 1.5 { 1.0 } else { 0.0 }
        })
        .unwrap();
        assert_eq!(log_polar_transform(&map, &params()).unwrap_err().to_string(), "zero-power signature");
    }

    #[test]
    fn bytes_round_trip_and_header() {
        let map = Frame::from_fn(32, 32, |c, r| ((c * 7 + r * 3) % 5) as f64).unwrap();
        let s = log_polar_transform(&map, &params()).unwrap();
        let b = s.to_bytes();
        assert_eq!(&b[..4], b"PMT1");
        assert_eq!(&b[4..8], &16u32.to_le_bytes());
        assert_eq!(&b[8..12], &32u32.to_le_bytes());
        assert_eq!(&b[12..16], &[0; 4]);
        assert_eq!(b.len(), 16 + 8 * 16 * 32);
        assert_eq!(PmtSignature::from_bytes(&b, params()).unwrap(), s);
        assert!(PmtSignature::from_bytes(&b[..100], params()).is_err());
        let other = PmtParams::new(3.0, 15.0, 8, 32).unwrap();
        assert!(PmtSignature::from_bytes(&b, other).is_err());
    }
}
