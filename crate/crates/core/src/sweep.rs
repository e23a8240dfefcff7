//! Ground-truth rotation/scale sweeps on a single segment.

use serde::{Deserialize, Serialize};

use crate::detect::{direct_correlate, estimate_transform, score_patch, DetectConfig};
use crate::error::Result;
use crate::frame::{normalize_power, Frame};
use crate::pmt::{pmt, PmtParams, PmtSignature};
use crate::scenegen::{make_object, transform_object, ObjectKind};

/// Object swept by default: a small grating on a 128 px canvas.
pub const SWEEP_OBJECT: ObjectKind = ObjectKind::Grating;
pub const SWEEP_CANVAS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub phi_deg: f64,
    pub alpha: f64,
    pub phi_hat_deg: f64,
    pub alpha_hat: f64,
    pub score: f64,
    pub lag_rho: i64,
    pub lag_theta: i64,
    /// θ-lags of the best rotation family found among all peaks.
    pub dual: Option<(i64, i64)>,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str =
        "phi_deg,alpha,phi_hat_deg,alpha_hat,score,lag_rho,lag_theta,dual_pos,dual_neg";

    pub fn to_csv(&self) -> String {
        let (p, n) = match self.dual {
            Some((p, n)) => (p.to_string(), n.to_string()),
            None => (String::new(), String::new()),
        };
        format!(
            "{:.4},{:.4},{:.4},{:.6},{:.6},{},{},{},{}",
            self.phi_deg, self.alpha, self.phi_hat_deg, self.alpha_hat, self.score, self.lag_rho, self.lag_theta, p, n
        )
    }
}

/// Reference object and its signature, reused across sweep cells.
pub struct Sweep {
    pub object: Frame,
    pub reference: PmtSignature,
    pub params: PmtParams,
    pub config: DetectConfig,
}

impl Sweep {
    pub fn new(params: PmtParams, config: DetectConfig) -> Result<Self> {
        let size = SWEEP_OBJECT.figure3_size(SWEEP_CANVAS);
        let object = make_object(SWEEP_OBJECT, size, SWEEP_CANVAS, SWEEP_CANVAS)?;
        Self::with_object(object, params, config)
    }

    pub fn with_object(object: Frame, params: PmtParams, config: DetectConfig) -> Result<Self> {
        let reference = pmt(&normalize_power(&object)?, &params)?;
        Ok(Self { object, reference, params, config })
    }

    pub fn signature(&self, phi_deg: f64, alpha: f64) -> Result<PmtSignature> {
        let moved = transform_object(&self.object, (0.0, 0.0), phi_deg.to_radians(), alpha)?;
        pmt(&normalize_power(&moved)?, &self.params)
    }

    pub fn cell(&self, phi_deg: f64, alpha: f64) -> Result<SweepRow> {
        let query = self.signature(phi_deg, alpha)?;
        let patch = direct_correlate(&self.reference, &query)?;
        let peaks = score_patch(&patch, &self.config);
        let est = estimate_transform(&peaks, &self.params, &self.config)?;
        let best = peaks.best().expect("estimate implies a peak");
        let dual = peaks
            .rotation_families(self.params.n_theta, &self.config)
            .first()
            .map(|&(i, j)| (peaks.peaks[i].lag_theta, peaks.peaks[j].lag_theta));
        Ok(SweepRow {
            phi_deg,
            alpha,
            phi_hat_deg: est.phi.to_degrees(),
            alpha_hat: est.alpha,
            score: best.value,
            lag_rho: best.lag_rho,
            lag_theta: best.lag_theta,
            dual,
        })
    }
}

/// Evenly spaced values `start, start + step, ...` up to `end` inclusive.
pub fn inclusive_range(start: f64, end: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || end < start {
        return vec![start];
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

/// Angular distance between two angles in degrees, modulo `period`.
pub fn angle_error_deg(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_include_endpoints() {
        assert_eq!(inclusive_range(10.0, 170.0, 10.0).len(), 17);
        let a = inclusive_range(0.5, 0.95, 0.05);
        assert_eq!(a.len(), 10);
        assert!((a[9] - 0.95).abs() < 1e-12);
        assert_eq!(inclusive_range(0.0, 0.0, 1.0), vec![0.0]);
    }

    #[test]
    fn angle_error_wraps() {
        assert!((angle_error_deg(179.0, 1.0, 180.0) - 2.0).abs() < 1e-12);
        assert!((angle_error_deg(10.0, 15.0, 180.0) - 5.0).abs() < 1e-12);
    }
}
