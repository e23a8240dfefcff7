//! Balanced joint transform correlator.
//!
//! Layout: the reference tile sits on the left, query tiles on a lattice to
//! its right with twice the tile pitch in both axes. Each tile's full lag
//! window `(2w-1) x (2h-1)` then lands in its own cell of the correlation
//! plane, clear of neighbouring tiles and of the mirrored twin terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::pmt::PmtSignature;
use crate::segmentation::SignatureSheet;
use crate::spectral::{dft2_centered, idft2_centered, magnitude, power_spectrum, ComplexField};

/// Tile placement inside the joint frame. Centers are centered coordinates (y up).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointGeometry {
    pub joint_width: usize,
    pub joint_height: usize,
    pub tile_width: usize,
    pub tile_height: usize,
    pub rows: usize,
    pub cols: usize,
    pub ref_center: (i64, i64),
    pub tile_centers: Vec<(i64, i64)>,
    pub tile_pitch: (usize, usize),
}

impl JointGeometry {
    /// Smallest joint frame that keeps every cross term unaliased.
    pub fn minimal_dims(rows: usize, cols: usize, tile_width: usize, tile_height: usize) -> (usize, usize) {
        (4 * cols * tile_width, 2 * rows * tile_height)
    }

    pub fn new(
        rows: usize,
        cols: usize,
        tile_width: usize,
        tile_height: usize,
        joint_dims: Option<(usize, usize)>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 || tile_width < 2 || tile_height < 2 {
            return Err(Error::Geometry(format!(
                "{rows}x{cols} sheet of {tile_width}x{tile_height} tiles"
            )));
        }
        let (min_w, min_h) = Self::minimal_dims(rows, cols, tile_width, tile_height);
        let (w, h) = joint_dims.unwrap_or((min_w, min_h));
        if w < min_w || h < min_h {
            return Err(Error::Geometry(format!(
                "sheet too large for declared joint dimensions {w}x{h}; need at least {min_w}x{min_h}"
            )));
        }
        if w % 2 != 0 || h % 2 != 0 {
            return Err(Error::Geometry(format!("joint dimensions {w}x{h} must be even")));
        }
        let (tw, th) = (tile_width as i64, tile_height as i64);
        let ref_center = (-(cols as i64) * tw + tw / 2, 0);
        let tile_centers = (0..rows * cols)
            .map(|k| {
                let (r, c) = ((k / cols) as i64, (k % cols) as i64);
                let dx = (2 * c + 1) * tw;
                let dy = (2 * r - (rows as i64 - 1)) * th;
                (ref_center.0 + dx, ref_center.1 - dy)
            })
            .collect();
        Ok(Self {
            joint_width: w,
            joint_height: h,
            tile_width,
            tile_height,
            rows,
            cols,
            ref_center,
            tile_centers,
            tile_pitch: (2 * tile_width, 2 * tile_height),
        })
    }

    /// Separation from the reference to tile `k`, in centered coordinates.
    pub fn separation(&self, k: usize) -> (i64, i64) {
        let (tx, ty) = self.tile_centers[k];
        (tx - self.ref_center.0, ty - self.ref_center.1)
    }

    /// Top-left pixel of a tile whose center is at centered `(x, y)`.
    fn top_left(&self, center: (i64, i64)) -> (usize, usize) {
        let col = self.joint_width as i64 / 2 + center.0 - self.tile_width as i64 / 2;
        let row = self.joint_height as i64 / 2 - center.1 - self.tile_height as i64 / 2;
        (col as usize, row as usize)
    }

    pub fn ref_top_left(&self) -> (usize, usize) {
        self.top_left(self.ref_center)
    }

    pub fn tile_top_left(&self, k: usize) -> (usize, usize) {
        self.top_left(self.tile_centers[k])
    }
}

/// Joint frame plus the reference-only and sheet-only frames the balanced JPS needs.
#[derive(Debug, Clone)]
pub struct JointInput {
    pub joint: Frame,
    pub ref_only: Frame,
    pub query_only: Frame,
    pub geometry: JointGeometry,
}

pub fn compose_joint_input(reference: &PmtSignature, sheet: &SignatureSheet) -> Result<JointInput> {
    compose_joint_input_with_dims(reference, sheet, None)
}

/// As [`compose_joint_input`], but with caller-declared joint dimensions.
pub fn compose_joint_input_with_dims(
    reference: &PmtSignature,
    sheet: &SignatureSheet,
    joint_dims: Option<(usize, usize)>,
) -> Result<JointInput> {
    if reference.params() != sheet.params() {
        return Err(Error::ParamsMismatch("reference and sheet use different PMT parameters".into()));
    }
    let (tw, th) = (reference.n_rho(), reference.n_theta());
    let grid = sheet.grid();
    let geometry = JointGeometry::new(grid.rows, grid.cols, tw, th, joint_dims)?;
    let (w, h) = (geometry.joint_width, geometry.joint_height);

    let mut ref_only = Frame::zeros(w, h)?;
    let (c0, r0) = geometry.ref_top_left();
    ref_only.paste(&reference.to_frame(), c0, r0)?;

    let mut query_only = Frame::zeros(w, h)?;
    for (k, sig) in sheet.signatures().iter().enumerate() {
        if let Some(sig) = sig {
            let (c0, r0) = geometry.tile_top_left(k);
            query_only.paste(&sig.to_frame(), c0, r0)?;
        }
    }

    let joint = Frame::new(
        w,
        h,
        ref_only.data().iter().zip(query_only.data()).map(|(a, b)| a + b).collect(),
    )?;
    Ok(JointInput { joint, ref_only, query_only, geometry })
}

/// JPS with both self-intensities subtracted: 2 Re(F_ref conj(F_query)).
pub fn balanced_jps(joint: &Frame, ref_only: &Frame, query_only: &Frame) -> Result<Frame> {
    if joint.dims() != ref_only.dims() || joint.dims() != query_only.dims() {
        return Err(Error::DimensionMismatch(format!(
            "joint {:?}, ref-only {:?}, query-only {:?}",
            joint.dims(),
            ref_only.dims(),
            query_only.dims()
        )));
    }
    let (pj, (pr, pq)) = rayon::join(
        || power_spectrum(&dft2_centered(joint)),
        || {
            rayon::join(
                || power_spectrum(&dft2_centered(ref_only)),
                || power_spectrum(&dft2_centered(query_only)),
            )
        },
    );
    let data = pj
        .data()
        .iter()
        .zip(pr.data())
        .zip(pq.data())
        .map(|((j, r), q)| j - r - q)
        .collect();
    Frame::new(joint.width(), joint.height(), data)
}

/// Unbalanced JPS, self-intensities included.
pub fn plain_jps(joint: &Frame) -> Frame {
    power_spectrum(&dft2_centered(joint))
}

/// Correlation output scaled so the reference autocorrelation peak reads 1.
#[derive(Debug, Clone)]
pub struct CorrelationPlane {
    pub data: Frame,
    pub geometry: JointGeometry,
    pub normalization: f64,
}

pub fn correlation_plane(jps: &Frame, geometry: &JointGeometry, norm_ref: &PmtSignature) -> Result<CorrelationPlane> {
    if jps.dims() != (geometry.joint_width, geometry.joint_height) {
        return Err(Error::DimensionMismatch(format!(
            "spectrum {:?} does not match joint {}x{}",
            jps.dims(),
            geometry.joint_width,
            geometry.joint_height
        )));
    }
    let energy: f64 = norm_ref.data().iter().map(|v| v * v).sum();
    let normalization = ((jps.width() * jps.height()) as f64).sqrt() / energy;
    let out = magnitude(&idft2_centered(&ComplexField::from_frame(jps)));
    let data = out.map(|v| v * normalization)?;
    Ok(CorrelationPlane { data, geometry: geometry.clone(), normalization })
}

/// The `(2w-1) x (2h-1)` lag window around each tile's separation vector;
/// the window center is zero lag.
pub fn extract_tile_correlations(plane: &CorrelationPlane) -> Result<Vec<(usize, Frame)>> {
    let g = &plane.geometry;
    if g.tile_centers.is_empty() {
        return Err(Error::Geometry("no query tiles".into()));
    }
    let (pw, ph) = (2 * g.tile_width - 1, 2 * g.tile_height - 1);
    let (ox, oy) = plane.data.origin();
    (0..g.tile_centers.len())
        .map(|k| {
            let (dx, dy) = g.separation(k);
            let col0 = ox as i64 + dx - (g.tile_width as i64 - 1);
            let row0 = oy as i64 - dy - (g.tile_height as i64 - 1);
            if col0 < 0 || row0 < 0 {
                return Err(Error::Geometry(format!("tile {k} window starts outside the plane")));
            }
            let patch = plane
                .data
                .crop(col0 as usize, row0 as usize, pw, ph)
                .map_err(|_| Error::Geometry(format!("tile {k} window exceeds the plane")))?;
            Ok((k, patch))
        })
        .collect()
}

/// Value at `peak` over the mean absolute value of the patch outside a
/// `(2 guard + 1)`-wide square around it.
pub fn peak_to_background(patch: &Frame, peak: (usize, usize), guard: usize) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for row in 0..patch.height() {
        for col in 0..patch.width() {
            if col.abs_diff(peak.0) <= guard && row.abs_diff(peak.1) <= guard {
                continue;
            }
            sum += patch.get(col, row).abs();
            n += 1;
        }
    }
    if n == 0 || sum == 0.0 {
        return f64::INFINITY;
    }
    patch.get(peak.0, peak.1) / (sum / n as f64)
}
