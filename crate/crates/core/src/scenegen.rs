//! Synthetic test objects, ground-truth transforms, and the figure3 grid.
//!
//! Transforms apply scale about the center, then counterclockwise rotation,
//! then translation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Edge, Frame, SegmentGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    /// Filled axis-aligned square of side `size`.
    Square,
    /// Two thin bars of length `size` and width `0.08 size`, crossing at 60°
    /// about the vertical.
    Cross,
    /// Upright cross with arms of width `size / 4`.
    Plus,
    /// Annulus of outer radius `size / 2`, inner radius `size / 4`.
    Ring,
    /// Three parallel vertical bars of length `size`, width and gap `size / 12`.
    Grating,
}

impl ObjectKind {
    /// Object size used on the figure3 grid for a segment of the given extent.
    pub fn figure3_size(self, extent: usize) -> f64 {
        let frac = match self {
            ObjectKind::Square => 0.55,
            ObjectKind::Cross => 0.625,
            ObjectKind::Plus => 0.625,
            ObjectKind::Ring => 0.66,
            ObjectKind::Grating => 0.375,
        };
        (frac * extent as f64).round()
    }

    fn contains(self, size: f64, x: f64, y: f64) -> bool {
        let h = size / 2.0;
        match self {
            ObjectKind::Square => x >= -h && x < h && y >= -h && y < h,
            ObjectKind::Ring => {
                let r = x.hypot(y);
                r <= h && r >= h / 2.0
            }
            ObjectKind::Plus => {
                let t = size / 8.0;
                (x.abs() < h && y.abs() < t) || (y.abs() < h && x.abs() < t)
            }
            ObjectKind::Cross => {
                let t = 0.04 * size;
                [PI / 3.0, 2.0 * PI / 3.0].iter().any(|&a| {
                    let (s, c) = f64::sin_cos(a);
                    let u = c * x + s * y;
                    let v = -s * x + c * y;
                    u.abs() < h && v.abs() < t
                })
            }
            ObjectKind::Grating => {
                let (bars, w) = (3.0, size / 12.0);
                let u = x + (2.0 * bars - 1.0) * w / 2.0;
                u >= 0.0 && u < (2.0 * bars - 1.0) * w && u.rem_euclid(2.0 * w) < w && y.abs() < h
            }
        }
    }
}

/// Binary object centered on a `width x height` canvas.
pub fn make_object(kind: ObjectKind, size: f64, width: usize, height: usize) -> Result<Frame> {
    if !(size > 0.0) || size >= width.min(height) as f64 {
        return Err(Error::InvalidScene(format!(
            "object size {size} must be positive and below the canvas extent {}",
            width.min(height)
        )));
    }
    let (ox, oy) = ((width / 2) as f64, (height / 2) as f64);
    Frame::from_fn(width, height, |c, r| {
        if kind.contains(size, c as f64 - ox, oy - r as f64) {
            1.0
        } else {
            0.0
        }
    })
}

/// Scales by `alpha`, rotates by `phi` (radians, counterclockwise), then
/// shifts by `(dx, dy)` (y up). Fails if any content would leave the canvas.
pub fn transform_object(obj: &Frame, shift: (f64, f64), phi: f64, alpha: f64) -> Result<Frame> {
    if !(alpha > 0.0) || !alpha.is_finite() || !phi.is_finite() || !shift.0.is_finite() || !shift.1.is_finite() {
        return Err(Error::InvalidScene(format!(
            "transform (shift {shift:?}, phi {phi}, alpha {alpha}) is not finite with alpha > 0"
        )));
    }
    if phi == 0.0 && alpha == 1.0 && shift == (0.0, 0.0) {
        return Ok(obj.clone());
    }
    let (w, h) = obj.dims();
    let (ox, oy) = obj.origin();
    let (s, c) = phi.sin_cos();

    // Forward-map every lit pixel's footprint and require it to land inside.
    let reach = alpha * std::f64::consts::FRAC_1_SQRT_2 + 1.0;
    let (x_lo, x_hi) = (-(ox as f64) + reach, (w - 1 - ox) as f64 - reach);
    let (y_lo, y_hi) = (-((h - 1 - oy) as f64) + reach, oy as f64 - reach);
    for row in 0..h {
        for col in 0..w {
            if obj.get(col, row) == 0.0 {
                continue;
            }
            let (x, y) = (col as f64 - ox as f64, oy as f64 - row as f64);
            let xf = alpha * (c * x - s * y) + shift.0;
            let yf = alpha * (s * x + c * y) + shift.1;
            if xf < x_lo || xf > x_hi || yf < y_lo || yf > y_hi {
                return Err(Error::Clipped(format!(
                    "pixel ({col}, {row}) maps to ({xf:.1}, {yf:.1}), outside the {w}x{h} canvas"
                )));
            }
        }
    }

    Frame::from_fn(w, h, |col, row| {
        let x = col as f64 - ox as f64 - shift.0;
        let y = oy as f64 - row as f64 - shift.1;
        let sx = (c * x + s * y) / alpha;
        let sy = (-s * x + c * y) / alpha;
        obj.sample_bilinear(sx, sy, Edge::Zero)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub row: usize,
    pub col: usize,
    pub kind: ObjectKind,
    pub size: f64,
    /// Intra-segment translation in pixels, y up.
    pub shift: (f64, f64),
    /// Rotation in radians, counterclockwise.
    pub phi: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub grid: SegmentGrid,
    pub placements: Vec<Placement>,
}

/// Ground truth for a rendered scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub width: usize,
    pub height: usize,
    pub grid: SegmentGrid,
    pub placements: Vec<Placement>,
}

impl SceneManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn placement_at(&self, row: usize, col: usize) -> Option<&Placement> {
        self.placements.iter().find(|p| p.row == row && p.col == col)
    }
}

/// Renders a single placement onto its own segment-sized canvas.
pub fn render_placement(p: &Placement, grid: &SegmentGrid) -> Result<Frame> {
    let obj = make_object(p.kind, p.size, grid.segment_width, grid.segment_height)?;
    transform_object(&obj, p.shift, p.phi, p.alpha)
}

pub fn render_scene(spec: &SceneSpec) -> Result<(Frame, SceneManifest)> {
    let grid = spec.grid;
    let mut seen = vec![false; grid.len()];
    for p in &spec.placements {
        if p.row >= grid.rows || p.col >= grid.cols {
            return Err(Error::InvalidScene(format!(
                "placement at ({}, {}) outside the {}x{} grid",
                p.row, p.col, grid.rows, grid.cols
            )));
        }
        let k = grid.index(p.row, p.col);
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidScene(format!("two placements in cell ({}, {})", p.row, p.col)));
        }
    }
    let (w, h) = grid.frame_dims();
    let mut frame = Frame::zeros(w, h)?;
    for p in &spec.placements {
        let seg = render_placement(p, &grid).map_err(|e| e.in_tile(grid.index(p.row, p.col)))?;
        frame.paste(&seg, p.col * grid.segment_width, p.row * grid.segment_height)?;
    }
    let manifest = SceneManifest { width: w, height: h, grid, placements: spec.placements.clone() };
    Ok((frame, manifest))
}

pub const FIGURE3_SEGMENT: usize = 128;
pub const FIGURE3_COLUMNS: [ObjectKind; 3] = [ObjectKind::Square, ObjectKind::Cross, ObjectKind::Ring];
/// Column of the figure3 grid holding transformed copies of the query object.
pub const FIGURE3_QUERY_COLUMN: usize = 2;
pub const FIGURE3_PHI_DEG: f64 = 40.0;
pub const FIGURE3_ALPHA: f64 = 0.7;

/// 4 rows x 3 columns (square, cross, ring): original, rotated by `phi`,
/// scaled by `alpha`, and both.
pub fn figure3_spec(phi: f64, alpha: f64) -> SceneSpec {
    let grid = SegmentGrid::new(4, 3, FIGURE3_SEGMENT, FIGURE3_SEGMENT).expect("static grid");
    let transforms = [(0.0, 1.0), (phi, 1.0), (0.0, alpha), (phi, alpha)];
    let placements = (0..4)
        .flat_map(|row| {
            FIGURE3_COLUMNS.iter().enumerate().map(move |(col, &kind)| Placement {
                row,
                col,
                kind,
                size: kind.figure3_size(FIGURE3_SEGMENT),
                shift: (0.0, 0.0),
                phi: transforms[row].0,
                alpha: transforms[row].1,
            })
        })
        .collect();
    SceneSpec { grid, placements }
}

/// The untransformed query object on a figure3 segment canvas.
pub fn figure3_reference() -> Frame {
    let kind = FIGURE3_COLUMNS[FIGURE3_QUERY_COLUMN];
    make_object(kind, kind.figure3_size(FIGURE3_SEGMENT), FIGURE3_SEGMENT, FIGURE3_SEGMENT)
        .expect("static object fits")
}
