//! Per-segment PMTs tiled into a query sheet.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{assemble_tiles, extract_segment, normalize_power, Frame, SegmentGrid};
use crate::pmt::{pmt, PmtParams, PmtSignature};

/// Signatures of every segment, row-major; `None` marks an all-zero segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureSheet {
    grid: SegmentGrid,
    params: PmtParams,
    signatures: Vec<Option<PmtSignature>>,
    sheet_frame: Frame,
}

/// JSON description of a sheet's layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetManifest {
    pub rows: usize,
    pub cols: usize,
    pub segment_width: usize,
    pub segment_height: usize,
    pub tile_width: usize,
    pub tile_height: usize,
    pub sheet_width: usize,
    pub sheet_height: usize,
    pub empty: Vec<bool>,
    pub params: PmtParams,
}

impl SignatureSheet {
    /// Builds a sheet from precomputed signatures (row-major over `grid`).
    pub fn from_signatures(
        grid: SegmentGrid,
        params: PmtParams,
        signatures: Vec<Option<PmtSignature>>,
    ) -> Result<Self> {
        let sheet_frame = build_sheet_frame(&signatures, &grid, &params)?;
        Ok(Self { grid, params, signatures, sheet_frame })
    }

    pub fn grid(&self) -> &SegmentGrid {
        &self.grid
    }

    pub fn params(&self) -> &PmtParams {
        &self.params
    }

    pub fn signatures(&self) -> &[Option<PmtSignature>] {
        &self.signatures
    }

    pub fn signature(&self, row: usize, col: usize) -> Option<&PmtSignature> {
        self.signatures[self.grid.index(row, col)].as_ref()
    }

    pub fn sheet_frame(&self) -> &Frame {
        &self.sheet_frame
    }

    pub fn len(&self) -> usize {
        self.signatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signatures.is_empty()
    }

    pub fn tile_is_empty(&self, index: usize) -> bool {
        self.signatures[index].is_none()
    }

    /// Tile `(row, col)` sliced from the sheet frame.
    pub fn tile(&self, row: usize, col: usize) -> Result<Frame> {
        let (w, h) = (self.params.n_rho, self.params.n_theta);
        self.sheet_frame.crop(col * w, row * h, w, h)
    }

    pub fn manifest(&self) -> SheetManifest {
        SheetManifest {
            rows: self.grid.rows,
            cols: self.grid.cols,
            segment_width: self.grid.segment_width,
            segment_height: self.grid.segment_height,
            tile_width: self.params.n_rho,
            tile_height: self.params.n_theta,
            sheet_width: self.sheet_frame.width(),
            sheet_height: self.sheet_frame.height(),
            empty: self.signatures.iter().map(Option::is_none).collect(),
            params: self.params,
        }
    }
}

/// PMT of each power-normalized segment. Segments run in parallel; the
/// result does not depend on scheduling.
pub fn segment_pmt(frame: &Frame, grid: &SegmentGrid, params: &PmtParams) -> Result<SignatureSheet> {
    grid.check_tiles(frame)?;
    params.validate_for(grid.segment_width, grid.segment_height)?;
    let signatures = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (row, col) = grid.cell(k);
            let seg = extract_segment(frame, grid, row, col)?;
            if seg.is_zero() {
                return Ok(None);
            }
            let seg = normalize_power(&seg)?;
            pmt(&seg, params).map(Some).map_err(|e| e.in_tile(k))
        })
        .collect::<Result<Vec<_>>>()?;
    SignatureSheet::from_signatures(*grid, *params, signatures)
}

/// Tiles signatures into a `(rows * n_theta) x (cols * n_rho)` frame; empty cells stay zero.
pub fn build_sheet_frame(
    signatures: &[Option<PmtSignature>],
    grid: &SegmentGrid,
    params: &PmtParams,
) -> Result<Frame> {
    if signatures.len() != grid.len() {
        return Err(Error::InvalidGrid(format!(
            "{} signatures for a {}x{} grid",
            signatures.len(),
            grid.rows,
            grid.cols
        )));
    }
    let zero = Frame::zeros(params.n_rho, params.n_theta)?;
    let tiles = signatures
        .iter()
        .enumerate()
        .map(|(k, s)| match s {
            Some(s) if s.params() != params => Err(Error::ParamsMismatch(format!(
                "signature {k} was computed with different parameters"
            ))),
            Some(s) => Ok(s.to_frame()),
            None => Ok(zero.clone()),
        })
        .collect::<Result<Vec<_>>>()?;
    assemble_tiles(grid.rows, grid.cols, &tiles)
}
