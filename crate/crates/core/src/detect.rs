//! Peak scoring, match decisions, and (φ, α) decoding.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bojtc::{balanced_jps, compose_joint_input, correlation_plane, extract_tile_correlations, JointGeometry};
use crate::error::{Error, Result};
use crate::frame::{Frame, SegmentGrid};
use crate::pmt::{PmtParams, PmtSignature};
use crate::segmentation::SignatureSheet;

pub const REPORT_SCHEMA: &str = "ssri-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub threshold: f64,
    /// Minimum absolute value for a local maximum to count as a peak.
    pub min_peak: f64,
    /// Chebyshev non-maximum suppression radius, in bins.
    pub nms_radius: usize,
    /// ρ-lag agreement required to pair two peaks as a rotation family.
    pub rho_tolerance: i64,
    /// Allowed deviation of a family's θ-lag gap from `n_theta`. Truncated
    /// overlap in linear correlation pulls the far peak inward a little.
    pub theta_tolerance: i64,
    /// Smallest weaker/stronger value ratio for a rotation family.
    pub pair_ratio: f64,
    pub max_peaks: usize,
    /// Parabolic sub-bin refinement of peak lags.
    pub subpixel: bool,
    /// Report φ modulo π. Spectra of real frames are point-symmetric, so
    /// their signatures only determine rotation up to a half turn.
    pub fold_half_turn: bool,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            min_peak: 0.05,
            nms_radius: 3,
            rho_tolerance: 2,
            theta_tolerance: 2,
            pair_ratio: 0.3,
            max_peaks: 16,
            subpixel: true,
            fold_half_turn: true,
        }
    }
}

/// A local maximum of a correlation patch. Lags are relative to the patch center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub lag_rho: i64,
    pub lag_theta: i64,
    pub value: f64,
    /// Sub-bin offsets from parabolic refinement, zero when disabled.
    pub offset_rho: f64,
    pub offset_theta: f64,
}

impl Peak {
    pub fn rho(&self) -> f64 {
        self.lag_rho as f64 + self.offset_rho
    }

    pub fn theta(&self) -> f64 {
        self.lag_theta as f64 + self.offset_theta
    }
}

/// Peaks in descending value order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn best(&self) -> Option<&Peak> {
        self.peaks.first()
    }

    /// Index pairs `(positive, negative)` whose θ-lags differ by `n_theta`
    /// with agreeing ρ-lags and comparable values.
    pub fn rotation_families(&self, n_theta: usize, config: &DetectConfig) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, a) in self.peaks.iter().enumerate() {
            for (j, b) in self.peaks.iter().enumerate() {
                if a.lag_theta <= 0 || b.lag_theta >= 0 {
                    continue;
                }
                let gap = a.lag_theta - b.lag_theta;
                let ratio = a.value.min(b.value) / a.value.max(b.value);
                if (gap - n_theta as i64).abs() <= config.theta_tolerance
                    && (a.lag_rho - b.lag_rho).abs() <= config.rho_tolerance
                    && ratio >= config.pair_ratio
                {
                    out.push((i, j));
                }
            }
        }
        out.sort_by_key(|&(i, j)| i.min(j));
        out
    }
}

fn parabolic(left: f64, mid: f64, right: f64) -> f64 {
    let denom = left - 2.0 * mid + right;
    if denom >= 0.0 {
        return 0.0;
    }
    (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
}

/// Local maxima above `min_peak`, suppressed within `nms_radius`.
pub fn score_patch(patch: &Frame, config: &DetectConfig) -> PeakSet {
    let (w, h) = patch.dims();
    let (cx, cy) = ((w / 2) as i64, (h / 2) as i64);
    let mut candidates = Vec::new();
    for row in 0..h {
        for col in 0..w {
            let v = patch.get(col, row);
            if v < config.min_peak {
                continue;
            }
            let mut is_max = true;
            'nb: for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (c, r) = (col as i64 + dc, row as i64 + dr);
                    if (dr, dc) == (0, 0) || c < 0 || r < 0 || c >= w as i64 || r >= h as i64 {
                        continue;
                    }
                    if patch.get(c as usize, r as usize) > v {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                candidates.push((col, row, v));
            }
        }
    }
    // Stable sort keeps raster order among ties.
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2));

    let radius = config.nms_radius as i64;
    let mut kept: Vec<(usize, usize, f64)> = Vec::new();
    for cand in candidates {
        if kept.len() >= config.max_peaks {
            break;
        }
        let near = kept.iter().any(|k| {
            (k.0 as i64 - cand.0 as i64).abs() <= radius && (k.1 as i64 - cand.1 as i64).abs() <= radius
        });
        if !near {
            kept.push(cand);
        }
    }

    let peaks = kept
        .into_iter()
        .map(|(col, row, value)| {
            let (mut offset_rho, mut offset_theta) = (0.0, 0.0);
            if config.subpixel {
                if col > 0 && col + 1 < w {
                    offset_rho = parabolic(patch.get(col - 1, row), value, patch.get(col + 1, row));
                }
                if row > 0 && row + 1 < h {
                    offset_theta = parabolic(patch.get(col, row - 1), value, patch.get(col, row + 1));
                }
            }
            Peak {
                lag_rho: col as i64 - cx,
                lag_theta: row as i64 - cy,
                value,
                offset_rho,
                offset_theta,
            }
        })
        .collect();
    PeakSet { peaks }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four lanes, always grouped from the start of the overlap, so lag L and
    // lag -L of an autocorrelation sum the same products in the same order.
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Full linear cross-correlation `c[lt][lp] = Σ ref[t][p] · query[t+lt][p+lp]`,
/// as a `(2 n_rho - 1) x (2 n_theta - 1)` frame with zero lag at the center.
pub fn direct_correlate(reference: &PmtSignature, query: &PmtSignature) -> Result<Frame> {
    if reference.params() != query.params() {
        return Err(Error::ParamsMismatch("signatures use different PMT parameters".into()));
    }
    Ok(correlate_grids(reference.data(), query.data(), reference.n_rho(), reference.n_theta()))
}

pub(crate) fn correlate_grids(a: &[f64], b: &[f64], n_rho: usize, n_theta: usize) -> Frame {
    let (nr, nt) = (n_rho as i64, n_theta as i64);
    let (w, h) = (2 * n_rho - 1, 2 * n_theta - 1);
    let rows: Vec<Vec<f64>> = (-(nt - 1)..nt)
        .into_par_iter()
        .map(|lt| {
            let mut out = vec![0.0; w];
            let (t0, t1) = ((-lt).max(0), nt.min(nt - lt));
            for t in t0..t1 {
                let ra = &a[(t * nr) as usize..((t + 1) * nr) as usize];
                let u = t + lt;
                let rb = &b[(u * nr) as usize..((u + 1) * nr) as usize];
                for (slot, lp) in out.iter_mut().zip(-(nr - 1)..nr) {
                    let (p0, p1) = ((-lp).max(0), nr.min(nr - lp));
                    *slot += dot(&ra[p0 as usize..p1 as usize], &rb[(p0 + lp) as usize..(p1 + lp) as usize]);
                }
            }
            out
        })
        .collect();
    Frame::from_parts_unchecked(w, h, rows.concat())
}

/// Decoded rotation and scale of a match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformEstimate {
    /// Radians in [0, 2π), or [0, π) when folded.
    pub phi: f64,
    pub alpha: f64,
    pub confidence: f64,
    /// θ-lags of the rotation family used, if any.
    pub family: Option<(i64, i64)>,
}

pub fn estimate_transform(peaks: &PeakSet, params: &PmtParams, config: &DetectConfig) -> Result<TransformEstimate> {
    let best = peaks.best().ok_or(Error::NoPeaks)?;
    let families = peaks.rotation_families(params.n_theta, config);
    // Only a family that contains the strongest peak decides φ.
    let chosen = families.iter().find(|&&(i, j)| i == 0 || j == 0).copied();
    let (theta_lag, family) = match chosen {
        Some((i, j)) => (peaks.peaks[i].theta(), Some((peaks.peaks[i].lag_theta, peaks.peaks[j].lag_theta))),
        None => (best.theta(), None),
    };
    let period = if config.fold_half_turn { PI } else { 2.0 * PI };
    let mut phi = (theta_lag * params.delta_theta()).rem_euclid(period);
    if phi >= period {
        phi = 0.0;
    }
    Ok(TransformEstimate {
        phi,
        alpha: (-best.rho() * params.delta_rho()).exp(),
        confidence: best.value.clamp(0.0, 1.0),
        family,
    })
}

/// Correlation patch for every tile (`None` for empty tiles), by direct
/// correlation or through the balanced JTC.
pub fn correlate_tiles(
    reference: &PmtSignature,
    sheet: &SignatureSheet,
    use_bojtc: bool,
) -> Result<(Vec<Option<Frame>>, Option<JointGeometry>)> {
    if reference.params() != sheet.params() {
        return Err(Error::ParamsMismatch("reference and sheet use different PMT parameters".into()));
    }
    if use_bojtc {
        let input = compose_joint_input(reference, sheet)?;
        let jps = balanced_jps(&input.joint, &input.ref_only, &input.query_only)?;
        let plane = correlation_plane(&jps, &input.geometry, reference)?;
        let patches = extract_tile_correlations(&plane)?
            .into_iter()
            .map(|(k, p)| (!sheet.tile_is_empty(k)).then_some(p))
            .collect();
        Ok((patches, Some(input.geometry)))
    } else {
        let patches = sheet
            .signatures()
            .par_iter()
            .map(|s| s.as_ref().map(|s| direct_correlate(reference, s)).transpose())
            .collect::<Result<Vec<_>>>()?;
        Ok((patches, None))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileReport {
    pub index: usize,
    pub row: usize,
    pub col: usize,
    pub matched: bool,
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phi_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lag_rho: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lag_theta: Option<i64>,
    pub empty: bool,
    #[serde(skip)]
    pub estimate: Option<TransformEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub schema: String,
    pub threshold: f64,
    pub scorer: String,
    pub grid: SegmentGrid,
    pub tiles: Vec<TileReport>,
    pub params: PmtParams,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub geometry: Option<JointGeometry>,
}

impl DetectionReport {
    pub fn matched_indices(&self) -> Vec<usize> {
        self.tiles.iter().filter(|t| t.matched).map(|t| t.index).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Turns per-tile patches into verdicts.
pub fn report_from_patches(
    patches: &[Option<Frame>],
    sheet: &SignatureSheet,
    config: &DetectConfig,
    geometry: Option<JointGeometry>,
) -> Result<DetectionReport> {
    let grid = *sheet.grid();
    let params = *sheet.params();
    let tiles = patches
        .iter()
        .enumerate()
        .map(|(index, patch)| {
            let (row, col) = grid.cell(index);
            let Some(patch) = patch else {
                return Ok(TileReport {
                    index,
                    row,
                    col,
                    matched: false,
                    score: 0.0,
                    phi_deg: None,
                    alpha: None,
                    lag_rho: None,
                    lag_theta: None,
                    empty: true,
                    estimate: None,
                });
            };
            let peaks = score_patch(patch, config);
            let score = patch.max().max(0.0);
            let matched = score > config.threshold;
            let estimate = if matched && !peaks.is_empty() {
                Some(estimate_transform(&peaks, &params, config).map_err(|e| e.in_tile(index))?)
            } else {
                None
            };
            let best = peaks.best();
            Ok(TileReport {
                index,
                row,
                col,
                matched,
                score,
                phi_deg: estimate.map(|e| e.phi.to_degrees()),
                alpha: estimate.map(|e| e.alpha),
                lag_rho: best.map(|p| p.lag_rho),
                lag_theta: best.map(|p| p.lag_theta),
                empty: false,
                estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DetectionReport {
        schema: REPORT_SCHEMA.to_string(),
        threshold: config.threshold,
        scorer: if geometry.is_some() { "bojtc" } else { "direct" }.to_string(),
        grid,
        tiles,
        params,
        geometry,
    })
}

pub fn detect_all(
    reference: &PmtSignature,
    sheet: &SignatureSheet,
    config: &DetectConfig,
    use_bojtc: bool,
) -> Result<DetectionReport> {
    let (patches, geometry) = correlate_tiles(reference, sheet, use_bojtc)?;
    report_from_patches(&patches, sheet, config, geometry)
}
