//! Shift-, scale- and rotation-invariant multi-object detection with a
//! segmented polar Mellin transform front end and a balanced joint
//! transform correlator back end.
//!
//! Pipeline: [`frame`] segments are power-normalized, each gets a
//! log-polar spectrum signature ([`pmt`]), the signatures are tiled into a
//! sheet ([`segmentation`]) and correlated against a reference either
//! directly or through the joint transform correlator ([`bojtc`]);
//! [`detect`] thresholds the peaks and decodes rotation and scale.

pub mod bojtc;
pub mod detect;
pub mod error;
pub mod frame;
pub mod io;
pub mod pmt;
pub mod scenegen;
pub mod segmentation;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use frame::{Frame, SegmentGrid};
pub use pmt::{Detector, PmtParams, PmtSignature};
