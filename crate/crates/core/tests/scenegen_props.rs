use spmt_core::scenegen::{
    figure3_spec, make_object, render_scene, transform_object, ObjectKind, SceneManifest, FIGURE3_SEGMENT,
};
use spmt_core::sweep::inclusive_range;

#[test]
fn every_sweep_cell_renders_figure3_unclipped() {
    for phi in inclusive_range(10.0, 170.0, 10.0) {
        for alpha in inclusive_range(0.5, 0.95, 0.05) {
            let spec = figure3_spec(phi.to_radians(), alpha);
            if let Err(e) = render_scene(&spec) {
                panic!("phi {phi}, alpha {alpha}: {e}");
            }
        }
    }
}

#[test]
fn figure3_frame_and_manifest() {
    let (frame, manifest) = render_scene(&figure3_spec(40f64.to_radians(), 0.7)).unwrap();
    assert_eq!(frame.dims(), (384, 512));
    assert_eq!((manifest.width, manifest.height), (384, 512));
    assert_eq!(manifest.placements.len(), 12);
    let back = SceneManifest::from_json(&manifest.to_json()).unwrap();
    assert_eq!(back.placements, manifest.placements);
    let p = back.placement_at(3, 2).unwrap();
    assert_eq!(p.kind, ObjectKind::Ring);
    assert!((p.phi.to_degrees() - 40.0).abs() < 1e-12 && p.alpha == 0.7);
    let (again, _) = render_scene(&figure3_spec(40f64.to_radians(), 0.7)).unwrap();
    assert_eq!(frame.data(), again.data());
}

#[test]
fn library_objects_fit_their_segment() {
    for kind in [ObjectKind::Square, ObjectKind::Cross, ObjectKind::Plus, ObjectKind::Ring, ObjectKind::Grating] {
        let obj = make_object(kind, kind.figure3_size(FIGURE3_SEGMENT), 128, 128).unwrap();
        assert!(obj.max() > 0.0, "{kind:?}");
        assert!(obj.min() >= 0.0);
        let id = transform_object(&obj, (0.0, 0.0), 0.0, 1.0).unwrap();
        assert_eq!(id.data(), obj.data());
    }
}

#[test]
fn shifting_out_of_the_canvas_is_an_error() {
    let obj = make_object(ObjectKind::Square, 70.0, 128, 128).unwrap();
    assert!(transform_object(&obj, (40.0, 0.0), 0.0, 1.0).is_err());
    assert!(transform_object(&obj, (5.0, -5.0), 0.0, 1.0).is_ok());
}
