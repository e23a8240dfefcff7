//! Run configuration: a JSON file mirroring the flags, with flags taking precedence.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use spmt_core::detect::DetectConfig;
use spmt_core::frame::SegmentGrid;
use spmt_core::pmt::PmtParams;

use crate::Failure;

/// `R x C` segment grid, written `4x3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (r, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("grid '{s}' is not of the form RxC"))?;
        let parse = |v: &str| v.trim().parse::<usize>().ok().filter(|&n| n > 0);
        match (parse(r), parse(c)) {
            (Some(rows), Some(cols)) => Ok(Self { rows, cols }),
            _ => Err(format!("grid '{s}' needs two positive integers")),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl Serialize for GridSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GridSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Every field optional; unset values fall back to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub r0: Option<f64>,
    pub rmax: Option<f64>,
    pub nrho: Option<usize>,
    pub ntheta: Option<usize>,
    pub grid: Option<GridSpec>,
    pub threshold: Option<f64>,
    pub use_bojtc: Option<bool>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("config {}: {e}", path.display())))
    }

    /// `self` overridden field by field with whatever `flags` sets.
    pub fn merged(self, flags: RunConfig) -> RunConfig {
        RunConfig {
            r0: flags.r0.or(self.r0),
            rmax: flags.rmax.or(self.rmax),
            nrho: flags.nrho.or(self.nrho),
            ntheta: flags.ntheta.or(self.ntheta),
            grid: flags.grid.or(self.grid),
            threshold: flags.threshold.or(self.threshold),
            use_bojtc: flags.use_bojtc.or(self.use_bojtc),
            out: flags.out.or(self.out),
            seed: flags.seed.or(self.seed),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("spmt-out"))
    }

    pub fn use_bojtc(&self) -> bool {
        self.use_bojtc.unwrap_or(false)
    }

    /// PMT parameters for `width x height` segments, checked against those dimensions.
    pub fn params_for(&self, width: usize, height: usize) -> Result<PmtParams, Failure> {
        let base = PmtParams::for_dims(width, height).map_err(|e| {
            Failure::Config(format!("no default PMT parameters for {width}x{height} segments: {e}"))
        })?;
        let params = PmtParams {
            r0: self.r0.unwrap_or(base.r0),
            r_max: self.rmax.unwrap_or(base.r_max),
            n_rho: self.nrho.unwrap_or(base.n_rho),
            n_theta: self.ntheta.unwrap_or(base.n_theta),
            detector: base.detector,
        };
        params.validate_for(width, height)?;
        Ok(params)
    }

    pub fn detect_config(&self) -> Result<DetectConfig, Failure> {
        let mut cfg = DetectConfig::default();
        if let Some(t) = self.threshold {
            if !t.is_finite() {
                return Err(Failure::Config(format!("threshold {t} must be finite")));
            }
            cfg.threshold = t;
        }
        Ok(cfg)
    }

    /// The configured grid for a `width x height` frame, `default` when unset.
    pub fn grid_for(&self, width: usize, height: usize, default: GridSpec) -> Result<SegmentGrid, Failure> {
        let g = self.grid.unwrap_or(default);
        Ok(SegmentGrid::for_dims(width, height, g.rows, g.cols)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!("4x3".parse::<GridSpec>().unwrap(), GridSpec { rows: 4, cols: 3 });
        assert_eq!("2X5".parse::<GridSpec>().unwrap(), GridSpec { rows: 2, cols: 5 });
        assert!("0x3".parse::<GridSpec>().is_err());
        assert!("4".parse::<GridSpec>().is_err());
        assert!("ax3".parse::<GridSpec>().is_err());
    }

    #[test]
    fn flags_win() {
        let file: RunConfig = serde_json::from_str(r#"{"r0": 5.0, "threshold": 0.7, "grid": "2x2"}"#).unwrap();
        let flags = RunConfig { r0: Some(8.0), ..Default::default() };
        let m = file.merged(flags);
        assert_eq!(m.r0, Some(8.0));
        assert_eq!(m.threshold, Some(0.7));
        assert_eq!(m.grid, Some(GridSpec { rows: 2, cols: 2 }));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"r_zero": 5.0}"#).is_err());
    }

    #[test]
    fn params_are_checked_against_the_segment() {
        let cfg = RunConfig { r0: Some(70.0), ..Default::default() };
        let err = cfg.params_for(128, 128).unwrap_err();
        assert!(matches!(err, Failure::Config(ref m) if m.contains("r0")), "{err:?}");
        let p = RunConfig::default().params_for(128, 128).unwrap();
        assert_eq!((p.r0, p.r_max, p.n_rho, p.n_theta), (10.0, 63.0, 128, 128));
    }
}
