//! Event-style gaze features: fixation-zone spread, scan paths, screen
//! approach and eye closure episodes.

use super::stats::{mean, sample_std, skewness};
use super::FeatureConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

fn cell_of(v: f64, lo: f64, hi: f64, grid: usize) -> usize {
    let width = (hi - lo) / grid as f64;
    let c = ((v - lo) / width).floor();
    if c < 0.0 {
        0
    } else {
        (c as usize).min(grid - 1)
    }
}

/// Mean and sample std of the per-cell coordinate spreads.
///
/// The `zone_bounds` box is split into `zone_grid x zone_grid` equal cells
/// (points outside clamp to the nearest cell). Every cell with at least two
/// samples contributes the sample std of the chosen axis.
pub fn fixation_zone_stats(xs: &[f64], ys: &[f64], axis: Axis, config: &FeatureConfig) -> Result<(f64, f64)> {
    check_lengths(xs.len(), ys.len())?;
    if xs.is_empty() {
        return Err(Error::Empty {
            what: "fixation zone input",
        });
    }
    let grid = config.zone_grid;
    let b = config.zone_bounds;
    let mut cells: Vec<Vec<f64>> = vec![Vec::new(); grid * grid];
    for (&x, &y) in xs.iter().zip(ys) {
        let cx = cell_of(x, b.x_min, b.x_max, grid);
        let cy = cell_of(y, b.y_min, b.y_max, grid);
        cells[cy * grid + cx].push(match axis {
            Axis::X => x,
            Axis::Y => y,
        });
    }
    let spreads: Vec<f64> = cells.iter().filter(|c| c.len() >= 2).map(|c| sample_std(c)).collect();
    Ok(match spreads.len() {
        0 => (0.0, 0.0),
        1 => (spreads[0], 0.0),
        _ => (mean(&spreads), sample_std(&spreads)),
    })
}

/// Maximal runs of `true`, as `(first_index, len)`.
fn runs(flags: impl IntoIterator<Item = bool>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for (i, f) in flags.into_iter().enumerate() {
        match (f, current.as_mut()) {
            (true, Some(run)) => run.1 += 1,
            (true, None) => current = Some((i, 1)),
            (false, Some(_)) => out.extend(current.take()),
            (false, None) => {}
        }
    }
    out.extend(current);
    out
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    match values.len() {
        0 => (0.0, 0.0),
        1 => (values[0], 0.0),
        _ => (mean(values), sample_std(values)),
    }
}

/// Mean and sample std of scan path lengths.
///
/// A step is scanning when its speed exceeds `velocity_threshold` (gaze
/// units per second); a scan path is a maximal run of scanning steps and its
/// length is the summed step distance.
pub fn scan_path_stats(xs: &[f64], ys: &[f64], timestamps_ms: &[f64], config: &FeatureConfig) -> Result<(f64, f64)> {
    check_lengths(xs.len(), ys.len())?;
    check_lengths(xs.len(), timestamps_ms.len())?;
    if xs.len() < 2 {
        return Err(Error::TooFewSamples {
            what: "scan path",
            needed: 2,
            got: xs.len(),
        });
    }
    let steps: Vec<f64> = (1..xs.len())
        .map(|i| (xs[i] - xs[i - 1]).hypot(ys[i] - ys[i - 1]))
        .collect();
    let scanning = steps.iter().enumerate().map(|(i, d)| {
        let dt_s = (timestamps_ms[i + 1] - timestamps_ms[i]) / 1000.0;
        d / dt_s > config.velocity_threshold
    });
    let lengths: Vec<f64> = runs(scanning)
        .into_iter()
        .map(|(start, len)| steps[start..start + len].iter().sum())
        .collect();
    Ok(mean_and_std(&lengths))
}

/// Fraction of approaching steps and mean approach episode duration (ms).
///
/// A step approaches when the distance drops by more than
/// `approach_delta_mm`. An episode spanning steps `i..=j` lasts
/// `t[j + 1] - t[i]`.
pub fn approach_stats(distances_mm: &[f64], timestamps_ms: &[f64], config: &FeatureConfig) -> Result<(f64, f64)> {
    check_lengths(distances_mm.len(), timestamps_ms.len())?;
    let n = distances_mm.len();
    if n < 2 {
        return Err(Error::TooFewSamples {
            what: "approach",
            needed: 2,
            got: n,
        });
    }
    let approaching: Vec<bool> = distances_mm
        .windows(2)
        .map(|d| d[0] - d[1] > config.approach_delta_mm)
        .collect();
    let episodes = runs(approaching.iter().copied());
    if episodes.is_empty() {
        return Ok((0.0, 0.0));
    }
    let ratio = approaching.iter().filter(|a| **a).count() as f64 / (n - 1) as f64;
    let durations: Vec<f64> = episodes
        .iter()
        .map(|&(start, len)| timestamps_ms[start + len] - timestamps_ms[start])
        .collect();
    Ok((ratio, mean(&durations)))
}

/// Mean, sample std and skewness of closure episode lengths in frames.
pub fn eye_closure_stats(closed: &[bool]) -> Result<(f64, f64, f64)> {
    if closed.is_empty() {
        return Err(Error::Empty {
            what: "eye closure flags",
        });
    }
    let lengths: Vec<f64> = runs(closed.iter().copied())
        .into_iter()
        .map(|(_, len)| len as f64)
        .collect();
    Ok(match lengths.len() {
        0 => (0.0, 0.0, 0.0),
        1 => (lengths[0], 0.0, 0.0),
        _ => (mean(&lengths), sample_std(&lengths), skewness(&lengths)),
    })
}
