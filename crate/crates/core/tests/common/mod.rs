#![allow(dead_code)]

use proptest::prelude::*;
use spmt_core::frame::Frame;
use spmt_core::pmt::{PmtParams, PmtSignature};

pub fn frame_strategy(max: usize) -> impl Strategy<Value = Frame> {
    (2..=max, 2..=max).prop_flat_map(|(w, h)| {
        prop::collection::vec(0.0f64..1.0, w * h).prop_map(move |d| Frame::new(w, h, d).unwrap())
    })
}

pub fn signature_from(params: PmtParams, raw: Vec<f64>) -> PmtSignature {
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    PmtSignature::from_data(params, raw.iter().map(|v| v / norm).collect()).unwrap()
}

/// Random unit-power signature; entries in (0.01, 1) so the power never vanishes.
pub fn signature_strategy(params: PmtParams) -> impl Strategy<Value = PmtSignature> {
    prop::collection::vec(0.01f64..1.0, params.n_rho * params.n_theta)
        .prop_map(move |raw| signature_from(params, raw))
}

pub fn small_params() -> PmtParams {
    PmtParams::new(2.0, 7.0, 8, 8).unwrap()
}

pub fn default_params() -> PmtParams {
    PmtParams::for_dims(128, 128).unwrap()
}

/// Circular-in-θ, zero-lag-in-ρ correlation of two signatures at θ-lag `lag`.
pub fn circular_theta_corr(a: &PmtSignature, b: &PmtSignature, lag: i64) -> f64 {
    let n = a.n_theta() as i64;
    (0..n)
        .map(|t| {
            let u = (t + lag).rem_euclid(n) as usize;
            a.theta_row(t as usize).iter().zip(b.theta_row(u)).map(|(x, y)| x * y).sum::<f64>()
        })
        .sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
