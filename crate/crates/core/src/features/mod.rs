//! The 31-slot affective gaze feature vector.
//!
//! Slot layout:
//!
//! | index | feature |
//! |-------|---------|
//! | 0–1   | screen approach ratio, mean approach episode time (ms) |
//! | 2–3   | mean and std of scan path lengths |
//! | 4–15  | X axis: mean, IQR Q1–Q2, IQR Q2–Q3, std, skewness, five band powers, mean and std of per-zone std |
//! | 16–27 | Y axis, same layout |
//! | 28–30 | mean, std and skewness of eye closure episode lengths (frames) |

pub mod gaze;
pub mod spectral;
pub mod stats;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::windowing::Window;

pub use gaze::{approach_stats, eye_closure_stats, fixation_zone_stats, scan_path_stats, Axis};
pub use spectral::band_psd;
pub use stats::{descriptive_stats, DescriptiveStats};

pub const FEATURE_COUNT: usize = 31;

const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "approach_ratio",
    "approach_time_avg_ms",
    "scan_path_len_avg",
    "scan_path_len_std",
    "x_mean",
    "x_iqr_q1q2",
    "x_iqr_q2q3",
    "x_std",
    "x_skewness",
    "x_psd_b1",
    "x_psd_b2",
    "x_psd_b3",
    "x_psd_b4",
    "x_psd_b5",
    "x_fixzone_std_avg",
    "x_fixzone_std_std",
    "y_mean",
    "y_iqr_q1q2",
    "y_iqr_q2q3",
    "y_std",
    "y_skewness",
    "y_psd_b1",
    "y_psd_b2",
    "y_psd_b3",
    "y_psd_b4",
    "y_psd_b5",
    "y_fixzone_std_avg",
    "y_fixzone_std_std",
    "eye_close_count_avg",
    "eye_close_count_std",
    "eye_close_count_skew",
];

/// Canonical feature names, in slot order.
pub fn feature_names() -> &'static [&'static str; FEATURE_COUNT] {
    &FEATURE_NAMES
}

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsdMode {
    /// Band edges in Hz.
    #[default]
    AbsoluteHz,
    /// Band edges in cycles per frame, converted to Hz with the frame rate.
    Normalized,
}

impl FromStr for PsdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hz" => Ok(PsdMode::AbsoluteHz),
            "normalized" => Ok(PsdMode::Normalized),
            other => Err(Error::InvalidParameter {
                name: "psd_mode",
                message: format!("expected `hz` or `normalized`, got `{other}`"),
            }),
        }
    }
}

impl fmt::Display for PsdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PsdMode::AbsoluteHz => "hz",
            PsdMode::Normalized => "normalized",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for ZoneBounds {
    fn default() -> Self {
        Self {
            x_min: -1.0,
            x_max: 1.0,
            y_min: -1.0,
            y_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    /// Step speed (gaze units per second) above which gaze counts as scanning.
    pub velocity_threshold: f64,
    /// Minimum per-step distance drop (mm) for a step to count as approaching.
    pub approach_delta_mm: f64,
    /// Fixation zones form a `zone_grid x zone_grid` partition of `zone_bounds`.
    pub zone_grid: usize,
    pub zone_bounds: ZoneBounds,
    pub psd_mode: PsdMode,
    /// Maximum bin spacing of the zero-padded periodogram.
    pub psd_pad_resolution_hz: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            velocity_threshold: 0.5,
            approach_delta_mm: 0.0,
            zone_grid: 3,
            zone_bounds: ZoneBounds::default(),
            psd_mode: PsdMode::AbsoluteHz,
            psd_pad_resolution_hz: 0.011,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, message: &str| {
            Err(Error::InvalidParameter {
                name,
                message: message.to_string(),
            })
        };
        if !(self.velocity_threshold > 0.0 && self.velocity_threshold.is_finite()) {
            return bad("velocity_threshold", "must be positive");
        }
        if !(self.approach_delta_mm >= 0.0 && self.approach_delta_mm.is_finite()) {
            return bad("approach_delta_mm", "must be non-negative");
        }
        if self.zone_grid == 0 {
            return bad("zone_grid", "must be at least 1");
        }
        let b = self.zone_bounds;
        if !(b.x_max > b.x_min && b.y_max > b.y_min) {
            return bad("zone_bounds", "max must exceed min on both axes");
        }
        if !(self.psd_pad_resolution_hz > 0.0 && self.psd_pad_resolution_hz.is_finite()) {
            return bad("psd_pad_resolution_hz", "must be positive");
        }
        Ok(())
    }
}

/// The 31 features of one window, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector([f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn new(values: [f64; FEATURE_COUNT]) -> Self {
        Self(values)
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; FEATURE_COUNT] = values.try_into().map_err(|_| Error::DimensionMismatch {
            expected: FEATURE_COUNT,
            got: values.len(),
        })?;
        Ok(Self(arr))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.0[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        FEATURE_NAMES.iter().copied().zip(self.0.iter().copied())
    }
}

impl std::ops::Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn axis_block(
    values: &[f64],
    xs: &[f64],
    ys: &[f64],
    axis: Axis,
    rate_hz: f64,
    config: &FeatureConfig,
) -> Result<[f64; 12]> {
    let s = descriptive_stats(values)?;
    let bands = band_psd(values, rate_hz, config)?;
    let (zone_avg, zone_std) = fixation_zone_stats(xs, ys, axis, config)?;
    Ok([
        s.mean, s.iqr_q1q2, s.iqr_q2q3, s.std, s.skewness, bands[0], bands[1], bands[2], bands[3], bands[4], zone_avg,
        zone_std,
    ])
}

/// Computes the full feature vector of one window.
pub fn extract(window: &Window<'_>, config: &FeatureConfig) -> Result<FeatureVector> {
    let samples = window.samples;
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            what: "feature window",
            needed: 2,
            got: samples.len(),
        });
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.gaze_x).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.gaze_y).collect();
    let ds: Vec<f64> = samples.iter().map(|s| s.screen_distance_mm).collect();
    let ts: Vec<f64> = samples.iter().map(|s| s.timestamp_ms).collect();
    let closed: Vec<bool> = samples.iter().map(|s| s.eye_closed).collect();
    if xs.iter().chain(&ys).chain(&ds).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: format!("window [{}, {}) ms", window.start_ms, window.end_ms),
        });
    }

    let (approach_ratio, approach_time) = approach_stats(&ds, &ts, config)?;
    let (scan_avg, scan_std) = scan_path_stats(&xs, &ys, &ts, config)?;
    let x_block = axis_block(&xs, &xs, &ys, Axis::X, window.rate_hz, config)?;
    let y_block = axis_block(&ys, &xs, &ys, Axis::Y, window.rate_hz, config)?;
    let (close_avg, close_std, close_skew) = eye_closure_stats(&closed)?;

    let mut v = [0.0; FEATURE_COUNT];
    v[0] = approach_ratio;
    v[1] = approach_time;
    v[2] = scan_avg;
    v[3] = scan_std;
    v[4..16].copy_from_slice(&x_block);
    v[16..28].copy_from_slice(&y_block);
    v[28] = close_avg;
    v[29] = close_std;
    v[30] = close_skew;
    debug_assert!(v.iter().all(|x| x.is_finite()));
    Ok(FeatureVector(v))
}

/// Extracts every window in order.
pub fn extract_all(windows: &[Window<'_>], config: &FeatureConfig) -> Result<Vec<FeatureVector>> {
    windows.iter().map(|w| extract(w, config)).collect()
}
