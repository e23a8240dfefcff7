mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use spmt_core::frame::Frame;
use spmt_core::spectral::{dft2_centered, idft2_centered, magnitude, power_spectrum, ComplexField};

use common::frame_strategy;

fn energy(f: &ComplexField) -> f64 {
    f.data().iter().map(Complex64::norm_sqr).sum()
}

#[test]
fn parseval_at_512() {
    let f = Frame::from_fn(512, 512, |c, r| ((c * 7 + r * 13) % 29) as f64 / 28.0).unwrap();
    let e = f.sum_squares();
    assert!((energy(&dft2_centered(&f)) - e).abs() / e < 1e-10);
}

#[test]
fn power_is_magnitude_squared() {
    let f = Frame::from_fn(20, 14, |c, r| ((c * 3 + r * 5) % 7) as f64).unwrap();
    let s = dft2_centered(&f);
    let (m, p) = (magnitude(&s), power_spectrum(&s));
    for (a, b) in m.data().iter().zip(p.data()) {
        assert!((a * a - b).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn parseval_and_round_trip(f in frame_strategy(24)) {
        let s = dft2_centered(&f);
        let e = f.sum_squares();
        prop_assert!((energy(&s) - e).abs() <= 1e-10 * e.max(1e-300));
        let back = idft2_centered(&s);
        for (z, v) in back.data().iter().zip(f.data()) {
            prop_assert!((z - Complex64::new(*v, 0.0)).norm() <= 1e-10);
        }
    }

    #[test]
    fn linearity(f in frame_strategy(12), a in -3.0f64..3.0, b in -3.0f64..3.0, seed in any::<u32>()) {
        let g = Frame::from_fn(f.width(), f.height(), |c, r| ((c as u32 * 7 + r as u32 * 11 + seed) % 13) as f64).unwrap();
        let mix = Frame::new(f.width(), f.height(), f.data().iter().zip(g.data()).map(|(x, y)| a * x + b * y).collect()).unwrap();
        let (sf, sg, sm) = (dft2_centered(&f), dft2_centered(&g), dft2_centered(&mix));
        for ((x, y), z) in sf.data().iter().zip(sg.data()).zip(sm.data()) {
            prop_assert!((x * a + y * b - z).norm() < 1e-10);
        }
    }

    #[test]
    fn circular_shift_keeps_magnitude(f in frame_strategy(16), dx in -20i64..20, dy in -20i64..20) {
        let m0 = magnitude(&dft2_centered(&f));
        let m1 = magnitude(&dft2_centered(&f.circshift(dx, dy)));
        prop_assert!(common::max_abs_diff(m0.data(), m1.data()) < 1e-10);
    }

    #[test]
    fn cross_term_identity(f in frame_strategy(10), seed in any::<u32>()) {
        let g = Frame::from_fn(f.width(), f.height(), |c, r| ((c as u32 * 5 + r as u32 * 3 + seed) % 11) as f64 / 10.0).unwrap();
        let sum = Frame::new(f.width(), f.height(), f.data().iter().zip(g.data()).map(|(x, y)| x + y).collect()).unwrap();
        let (a, b) = (dft2_centered(&f), dft2_centered(&g));
        let (pa, pb, ps) = (power_spectrum(&a), power_spectrum(&b), power_spectrum(&dft2_centered(&sum)));
        for i in 0..ps.data().len() {
            let want = 2.0 * (a.data()[i] * b.data()[i].conj()).re;
            prop_assert!((ps.data()[i] - pa.data()[i] - pb.data()[i] - want).abs() < 1e-10);
        }
    }
}
