mod common;

use proptest::prelude::*;
use spmt_core::frame::{assemble_tiles, extract_segment, normalize_power, Frame, SegmentGrid};

use common::frame_strategy;

#[test]
fn figure3_sized_frame_reassembles_bit_exactly() {
    let f = Frame::from_fn(384, 512, |c, r| ((c * 131 + r * 7919) % 1000) as f64 / 999.0).unwrap();
    let grid = SegmentGrid::for_frame(&f, 4, 3).unwrap();
    assert_eq!((grid.segment_width, grid.segment_height), (128, 128));
    let segs: Vec<_> = (0..12)
        .map(|k| {
            let (r, c) = grid.cell(k);
            extract_segment(&f, &grid, r, c).unwrap()
        })
        .collect();
    assert_eq!(assemble_tiles(4, 3, &segs).unwrap(), f);
}

#[test]
fn random_64_frame_has_unit_power() {
    let f = Frame::from_fn(64, 64, |c, r| ((c * 37 + r * 101) % 53) as f64 + 0.5).unwrap();
    let n = normalize_power(&f).unwrap();
    assert!((n.sum_squares() - 1.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn segments_reassemble(rows in 1usize..4, cols in 1usize..4, sw in 2usize..7, sh in 2usize..7, seed in any::<u64>()) {
        let f = Frame::from_fn(cols * sw, rows * sh, |c, r| ((c as u64 * 31 + r as u64 * 17 + seed) % 97) as f64).unwrap();
        let grid = SegmentGrid::for_frame(&f, rows, cols).unwrap();
        let segs: Vec<_> = (0..grid.len()).map(|k| {
            let (r, c) = grid.cell(k);
            extract_segment(&f, &grid, r, c).unwrap()
        }).collect();
        prop_assert_eq!(assemble_tiles(rows, cols, &segs).unwrap(), f);
    }

    #[test]
    fn normalize_is_idempotent_and_scale_free(f in frame_strategy(12), k in 0.01f64..100.0) {
        prop_assume!(f.sum_squares() > 1e-6);
        let once = normalize_power(&f).unwrap();
        prop_assert!((once.sum_squares() - 1.0).abs() < 1e-12);
        let twice = normalize_power(&once).unwrap();
        let scaled = normalize_power(&f.map(|v| v * k).unwrap()).unwrap();
        for ((a, b), c) in once.data().iter().zip(twice.data()).zip(scaled.data()) {
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((a - c).abs() < 1e-12);
        }
    }
}
