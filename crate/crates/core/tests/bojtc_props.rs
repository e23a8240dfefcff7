mod common;

use proptest::prelude::*;
use spmt_core::bojtc::{
    balanced_jps, compose_joint_input, compose_joint_input_with_dims, correlation_plane, extract_tile_correlations,
    JointGeometry,
};
use spmt_core::detect::direct_correlate;
use spmt_core::frame::{Frame, SegmentGrid};
use spmt_core::pmt::PmtSignature;
use spmt_core::segmentation::SignatureSheet;

use common::{max_abs_diff, signature_strategy, small_params};

fn sheet_of(rows: usize, cols: usize, sigs: Vec<Option<PmtSignature>>) -> SignatureSheet {
    let grid = SegmentGrid::new(rows, cols, 16, 16).unwrap();
    SignatureSheet::from_signatures(grid, small_params(), sigs).unwrap()
}

fn plane_for(reference: &PmtSignature, sheet: &SignatureSheet) -> spmt_core::bojtc::CorrelationPlane {
    let input = compose_joint_input(reference, sheet).unwrap();
    let bjps = balanced_jps(&input.joint, &input.ref_only, &input.query_only).unwrap();
    correlation_plane(&bjps, &input.geometry, reference).unwrap()
}

/// |Σ r(a) q(a+v) + Σ r(a) q(a-v)| with circular indexing, straight from the definition.
fn spatial_plane(r: &Frame, q: &Frame) -> Vec<f64> {
    let (w, h) = r.dims();
    let lit: Vec<(usize, usize, f64)> = (0..h)
        .flat_map(|row| (0..w).map(move |col| (col, row)))
        .filter_map(|(c, rr)| (r.get(c, rr) != 0.0).then(|| (c, rr, r.get(c, rr))))
        .collect();
    let (ox, oy) = r.origin();
    let mut out = vec![0.0; w * h];
    for row in 0..h {
        for col in 0..w {
            let (vx, vy) = (col as i64 - ox as i64, row as i64 - oy as i64);
            let mut s = 0.0;
            for &(c, rr, v) in &lit {
                let fwd = q.get((c as i64 + vx).rem_euclid(w as i64) as usize, (rr as i64 + vy).rem_euclid(h as i64) as usize);
                let back = q.get((c as i64 - vx).rem_euclid(w as i64) as usize, (rr as i64 - vy).rem_euclid(h as i64) as usize);
                s += v * (fwd + back);
            }
            out[row * w + col] = s.abs();
        }
    }
    out
}

#[test]
fn plane_matches_spatial_oracle() {
    let p = small_params();
    let mk = |k: usize| {
        let raw: Vec<f64> = (0..64).map(|i| ((i * (7 + 2 * k) + k) % 13) as f64 + 0.5).collect();
        common::signature_from(p, raw)
    };
    let sheet = sheet_of(2, 3, (0..6).map(|k| Some(mk(k))).collect());
    let reference = mk(9);
    let input = compose_joint_input(&reference, &sheet).unwrap();
    let plane = plane_for(&reference, &sheet);
    let oracle = spatial_plane(&input.ref_only, &input.query_only);
    assert!(max_abs_diff(plane.data.data(), &oracle) < 1e-9);
}

#[test]
fn ref_against_itself_peaks_at_one_on_the_separation() {
    let p = small_params();
    let reference = common::signature_from(p, (0..64).map(|i| ((i * 5) % 11) as f64 + 1.0).collect());
    let sheet = sheet_of(1, 1, vec![Some(reference.clone())]);
    let plane = plane_for(&reference, &sheet);
    let (dx, dy) = plane.geometry.separation(0);
    assert!((plane.data.at_centered(dx, dy) - 1.0).abs() < 0.01);
    assert!((plane.data.at_centered(-dx, -dy) - 1.0).abs() < 0.01);
    let beyond = plane.data.data().iter().copied().fold(0.0, f64::max);
    assert!(beyond <= 1.0 + 1e-12);
}

#[test]
fn zero_sheet_gives_flat_plane_and_quiet_empty_patches() {
    let p = small_params();
    let reference = common::signature_from(p, vec![1.0; 64]);
    let sheet = sheet_of(2, 2, vec![None; 4]);
    let input = compose_joint_input(&reference, &sheet).unwrap();
    let bjps = balanced_jps(&input.joint, &input.ref_only, &input.query_only).unwrap();
    assert!(bjps.data().iter().all(|v| v.abs() < 1e-12));
    let plane = correlation_plane(&bjps, &input.geometry, &reference).unwrap();
    assert!(plane.data.max() <= 1e-10);
    for (_, patch) in extract_tile_correlations(&plane).unwrap() {
        assert!(patch.max() <= 1e-6);
    }
}

#[test]
fn geometry_round_trip_and_lattice() {
    let p = small_params();
    let sigs: Vec<_> = (0..12)
        .map(|k| (k != 5).then(|| common::signature_from(p, (0..64).map(|i| ((i + k) % 7) as f64 + 0.1).collect())))
        .collect();
    let sheet = sheet_of(4, 3, sigs.clone());
    let reference = common::signature_from(p, vec![2.0; 64]);
    let input = compose_joint_input(&reference, &sheet).unwrap();
    let g = &input.geometry;
    let (c0, r0) = g.ref_top_left();
    assert_eq!(input.joint.crop(c0, r0, 8, 8).unwrap(), reference.to_frame());
    for (k, s) in sigs.iter().enumerate() {
        let (c, r) = g.tile_top_left(k);
        let tile = input.joint.crop(c, r, 8, 8).unwrap();
        match s {
            Some(s) => assert_eq!(tile, s.to_frame()),
            None => assert!(tile.is_zero()),
        }
        let (row, col) = (k / 3, k % 3);
        let (x0, y0) = g.tile_centers[0];
        assert_eq!(g.tile_centers[k], (x0 + (col * g.tile_pitch.0) as i64, y0 - (row * g.tile_pitch.1) as i64));
    }
    let plane = plane_for(&reference, &sheet);
    let patches = extract_tile_correlations(&plane).unwrap();
    assert_eq!(patches.iter().map(|p| p.0).collect::<Vec<_>>(), (0..12).collect::<Vec<_>>());
    assert!(patches[5].1.max() <= 1e-6);
}

#[test]
fn declared_joint_too_small_is_rejected() {
    let p = small_params();
    let reference = common::signature_from(p, vec![1.0; 64]);
    let sheet = sheet_of(2, 2, vec![Some(reference.clone()); 4]);
    let (w, h) = JointGeometry::minimal_dims(2, 2, 8, 8);
    assert!(compose_joint_input_with_dims(&reference, &sheet, Some((w - 2, h))).is_err());
    let big = compose_joint_input_with_dims(&reference, &sheet, Some((w + 16, h + 8))).unwrap();
    assert_eq!(big.joint.dims(), (w + 16, h + 8));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn patches_equal_direct_correlation(
        reference in signature_strategy(small_params()),
        a in signature_strategy(small_params()),
        b in signature_strategy(small_params()),
    ) {
        let sheet = sheet_of(1, 2, vec![Some(a.clone()), Some(b.clone())]);
        let plane = plane_for(&reference, &sheet);
        let patches = extract_tile_correlations(&plane).unwrap();
        for ((_, patch), sig) in patches.iter().zip([&a, &b]) {
            let direct = direct_correlate(&reference, sig).unwrap();
            prop_assert_eq!(patch.dims(), direct.dims());
            prop_assert!(max_abs_diff(patch.data(), direct.data()) < 1e-9);
        }
    }

    #[test]
    fn superposition_and_point_symmetry(
        reference in signature_strategy(small_params()),
        a in signature_strategy(small_params()),
        b in signature_strategy(small_params()),
    ) {
        let both = plane_for(&reference, &sheet_of(1, 2, vec![Some(a.clone()), Some(b.clone())]));
        let only_a = plane_for(&reference, &sheet_of(1, 2, vec![Some(a), None]));
        let only_b = plane_for(&reference, &sheet_of(1, 2, vec![None, Some(b)]));
        let sum: Vec<f64> = only_a.data.data().iter().zip(only_b.data.data()).map(|(x, y)| x + y).collect();
        prop_assert!(max_abs_diff(both.data.data(), &sum) < 1e-9);

        let d = &both.data;
        let (w, h) = (d.width() as i64, d.height() as i64);
        for y in -(h / 2 - 1)..h / 2 {
            for x in -(w / 2 - 1)..w / 2 {
                prop_assert!((d.at_centered(x, y) - d.at_centered(-x, -y)).abs() < 1e-9);
            }
        }
    }
}
