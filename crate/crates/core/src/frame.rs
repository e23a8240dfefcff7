//! Real 2D grids, the centered coordinate convention, and segment tiling.
//!
//! Pixel `(col, row)` maps to centered coordinates `x = col - width/2`,
//! `y = height/2 - row`, so `y` grows upward and the origin sits on pixel
//! `(width/2, height/2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major real grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

/// How bilinear sampling treats positions outside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// Missing neighbours read as zero.
    Zero,
    /// Missing neighbours read as the nearest edge pixel.
    Clamp,
}

impl Frame {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidFrame(format!(
                "dimensions {width}x{height} below the 2x2 minimum"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidFrame(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidFrame(format!("non-finite value at index {i}")));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0.0; width * height])
    }

    /// Builds a frame from `f(col, row)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(col, row));
            }
        }
        Self::new(width, height, data)
    }

    pub(crate) fn from_parts_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self { width, height, data }
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    /// Pixel index of the centered origin.
    pub fn origin(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }

    pub fn to_centered(&self, col: usize, row: usize) -> (i64, i64) {
        let (ox, oy) = self.origin();
        (col as i64 - ox as i64, oy as i64 - row as i64)
    }

    /// Pixel index for centered coordinates, if inside the grid.
    pub fn from_centered(&self, x: i64, y: i64) -> Option<(usize, usize)> {
        let (ox, oy) = self.origin();
        let col = ox as i64 + x;
        let row = oy as i64 - y;
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            None
        } else {
            Some((col as usize, row as usize))
        }
    }

    /// Value at centered coordinates `(x, y)`, zero outside.
    pub fn at_centered(&self, x: i64, y: i64) -> f64 {
        self.from_centered(x, y).map_or(0.0, |(c, r)| self.get(c, r))
    }

    /// Bilinear sample at real-valued centered coordinates.
    pub fn sample_bilinear(&self, x: f64, y: f64, edge: Edge) -> f64 {
        let (ox, oy) = self.origin();
        let colf = ox as f64 + x;
        let rowf = oy as f64 - y;
        let c0 = colf.floor();
        let r0 = rowf.floor();
        let fx = colf - c0;
        let fy = rowf - r0;
        let (c0, r0) = (c0 as i64, r0 as i64);
        let px = |c: i64, r: i64| -> f64 {
            match edge {
                Edge::Zero => {
                    if c < 0 || r < 0 || c >= self.width as i64 || r >= self.height as i64 {
                        0.0
                    } else {
                        self.get(c as usize, r as usize)
                    }
                }
                Edge::Clamp => {
                    let c = c.clamp(0, self.width as i64 - 1) as usize;
                    let r = r.clamp(0, self.height as i64 - 1) as usize;
                    self.get(c, r)
                }
            }
        };
        px(c0, r0) * (1.0 - fx) * (1.0 - fy)
            + px(c0 + 1, r0) * fx * (1.0 - fy)
            + px(c0, r0 + 1) * (1.0 - fx) * fy
            + px(c0 + 1, r0 + 1) * fx * fy
    }

    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Pixel of the largest value; the first in raster order on ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, v) in self.data.iter().enumerate() {
            if *v > self.data[best] {
                best = i;
            }
        }
        (best % self.width, best / self.width)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Copies a `width x height` window whose top-left pixel is `(col0, row0)`.
    pub fn crop(&self, col0: usize, row0: usize, width: usize, height: usize) -> Result<Self> {
        if col0 + width > self.width || row0 + height > self.height {
            return Err(Error::InvalidFrame(format!(
                "crop {width}x{height} at ({col0}, {row0}) exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(width * height);
        for r in row0..row0 + height {
            data.extend_from_slice(&self.row(r)[col0..col0 + width]);
        }
        Self::new(width, height, data)
    }

    /// Writes `tile` with its top-left pixel at `(col0, row0)`.
    pub fn paste(&mut self, tile: &Frame, col0: usize, row0: usize) -> Result<()> {
        if col0 + tile.width > self.width || row0 + tile.height > self.height {
            return Err(Error::InvalidFrame(format!(
                "paste {}x{} at ({col0}, {row0}) exceeds {}x{}",
                tile.width, tile.height, self.width, self.height
            )));
        }
        for r in 0..tile.height {
            let dst = (row0 + r) * self.width + col0;
            self.data[dst..dst + tile.width].copy_from_slice(tile.row(r));
        }
        Ok(())
    }

    /// Circular shift by `(dx, dy)` in centered coordinates (y up).
    pub fn circshift(&self, dx: i64, dy: i64) -> Self {
        let (w, h) = (self.width as i64, self.height as i64);
        let mut out = vec![0.0; self.data.len()];
        for row in 0..h {
            let dst_row = (row - dy).rem_euclid(h);
            for col in 0..w {
                let dst_col = (col + dx).rem_euclid(w);
                out[(dst_row * w + dst_col) as usize] = self.data[(row * w + col) as usize];
            }
        }
        Self::from_parts_unchecked(self.width, self.height, out)
    }
}

/// Scales a frame to unit sum of squares.
pub fn normalize_power(frame: &Frame) -> Result<Frame> {
    let energy = frame.sum_squares();
    if energy == 0.0 {
        return Err(Error::ZeroPowerFrame);
    }
    let k = 1.0 / energy.sqrt();
    Ok(Frame::from_parts_unchecked(
        frame.width,
        frame.height,
        frame.data.iter().map(|v| v * k).collect(),
    ))
}

/// A rows x cols partition of a frame into equal segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentGrid {
    pub rows: usize,
    pub cols: usize,
    pub segment_width: usize,
    pub segment_height: usize,
}

impl SegmentGrid {
    pub fn new(rows: usize, cols: usize, segment_width: usize, segment_height: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidGrid(format!("{rows}x{cols} grid has no cells")));
        }
        if segment_width < 2 || segment_height < 2 {
            return Err(Error::InvalidGrid(format!(
                "segment size {segment_width}x{segment_height} below 2x2"
            )));
        }
        Ok(Self { rows, cols, segment_width, segment_height })
    }

    /// Grid that splits a `width x height` frame into `rows x cols` segments exactly.
    pub fn for_dims(width: usize, height: usize, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidGrid(format!("{rows}x{cols} grid has no cells")));
        }
        if width % cols != 0 || height % rows != 0 {
            return Err(Error::InvalidGrid(format!(
                "{rows}x{cols} grid does not tile a {width}x{height} frame"
            )));
        }
        Self::new(rows, cols, width / cols, height / rows)
    }

    pub fn for_frame(frame: &Frame, rows: usize, cols: usize) -> Result<Self> {
        Self::for_dims(frame.width(), frame.height(), rows, cols)
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn frame_dims(&self) -> (usize, usize) {
        (self.cols * self.segment_width, self.rows * self.segment_height)
    }

    pub fn check_tiles(&self, frame: &Frame) -> Result<()> {
        if self.frame_dims() != frame.dims() {
            let (w, h) = self.frame_dims();
            return Err(Error::InvalidGrid(format!(
                "grid covers {w}x{h} but frame is {}x{}",
                frame.width(),
                frame.height()
            )));
        }
        Ok(())
    }

    /// Row-major cell index.
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn cell(&self, index: usize) -> (usize, usize) {
        (index / self.cols, index % self.cols)
    }
}

pub fn extract_segment(frame: &Frame, grid: &SegmentGrid, row: usize, col: usize) -> Result<Frame> {
    grid.check_tiles(frame)?;
    if row >= grid.rows || col >= grid.cols {
        return Err(Error::SegmentOutOfBounds { row, col, rows: grid.rows, cols: grid.cols });
    }
    frame.crop(
        col * grid.segment_width,
        row * grid.segment_height,
        grid.segment_width,
        grid.segment_height,
    )
}

/// Tiles equally sized frames (row-major) into one frame.
pub fn assemble_tiles(rows: usize, cols: usize, tiles: &[Frame]) -> Result<Frame> {
    if rows * cols != tiles.len() || tiles.is_empty() {
        return Err(Error::InvalidGrid(format!(
            "{} tiles for a {rows}x{cols} grid",
            tiles.len()
        )));
    }
    let (tw, th) = tiles[0].dims();
    if let Some(bad) = tiles.iter().position(|t| t.dims() != (tw, th)) {
        return Err(Error::DimensionMismatch(format!(
            "tile {bad} is {}x{}, expected {tw}x{th}",
            tiles[bad].width(),
            tiles[bad].height()
        )));
    }
    let mut out = Frame::zeros(cols * tw, rows * th)?;
    for (k, tile) in tiles.iter().enumerate() {
        out.paste(tile, (k % cols) * tw, (k / cols) * th)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_frames() {
        assert!(Frame::new(1, 5, vec![0.0; 5]).is_err());
        assert!(Frame::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Frame::new(2, 2, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn centered_coordinates_put_y_up() {
        let f = Frame::zeros(4, 4).unwrap();
        assert_eq!(f.origin(), (2, 2));
        assert_eq!(f.to_centered(2, 2), (0, 0));
        assert_eq!(f.to_centered(3, 0), (1, 2));
        assert_eq!(f.from_centered(1, 2), Some((3, 0)));
        assert_eq!(f.from_centered(2, 0), None);
    }

    #[test]
    fn normalize_constant_and_345() {
        let f = Frame::new(2, 2, vec![1.0; 4]).unwrap();
        assert_eq!(normalize_power(&f).unwrap().data(), &[0.5; 4]);
        let f = Frame::new(2, 2, vec![3.0, 4.0, 0.0, 0.0]).unwrap();
        let n = normalize_power(&f).unwrap();
        assert!((n.data()[0] - 0.6).abs() < 1e-15 && (n.data()[1] - 0.8).abs() < 1e-15);
        let z = Frame::zeros(3, 3).unwrap();
        assert_eq!(normalize_power(&z).unwrap_err().to_string(), "zero-power frame");
    }

    #[test]
    fn extract_corner_and_identity() {
        let f = Frame::from_fn(4, 4, |c, r| (r * 4 + c) as f64).unwrap();
        let g = SegmentGrid::for_frame(&f, 2, 2).unwrap();
        let s = extract_segment(&f, &g, 0, 0).unwrap();
        assert_eq!(s.data(), &[0.0, 1.0, 4.0, 5.0]);
        let g1 = SegmentGrid::for_frame(&f, 1, 1).unwrap();
        assert_eq!(extract_segment(&f, &g1, 0, 0).unwrap(), f);
        assert!(extract_segment(&f, &g, 2, 0).is_err());
    }

    #[test]
    fn grid_must_divide_frame() {
        let f = Frame::zeros(10, 9).unwrap();
        assert!(SegmentGrid::for_frame(&f, 2, 2).is_err());
        assert!(SegmentGrid::for_frame(&f, 3, 5).is_ok());
        let g = SegmentGrid::new(2, 2, 4, 4).unwrap();
        assert!(extract_segment(&f, &g, 0, 0).is_err());
    }

    #[test]
    fn bilinear_hits_pixels_and_midpoints() {
        let f = Frame::from_fn(4, 4, |c, r| (c + 10 * r) as f64).unwrap();
        assert_eq!(f.sample_bilinear(0.0, 0.0, Edge::Zero), 22.0);
        assert_eq!(f.sample_bilinear(0.5, 0.0, Edge::Zero), 22.5);
        assert_eq!(f.sample_bilinear(0.0, 0.5, Edge::Zero), 17.0);
        assert_eq!(f.sample_bilinear(-3.0, 0.0, Edge::Zero), 0.0);
        assert_eq!(f.sample_bilinear(-3.0, 0.0, Edge::Clamp), 20.0);
    }

    #[test]
    fn circshift_moves_content_up_and_right() {
        let mut f = Frame::zeros(6, 6).unwrap();
        f.set(3, 3, 1.0);
        let g = f.circshift(2, 1);
        assert_eq!(g.at_centered(2, 1), 1.0);
        assert_eq!(f.circshift(-7, 13).circshift(7, -13), f);
    }
}
