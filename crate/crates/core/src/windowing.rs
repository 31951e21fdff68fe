//! Overlapping fixed-length windows and per-window affect targets.

use crate::error::{Error, Result};
use crate::ingest::{AnnotationTrack, Dimension, GazeSample, GazeSequence};

pub const DEFAULT_WINDOW_S: f64 = 3.0;
pub const DEFAULT_HOP_S: f64 = 2.0;

/// Slack (ms) when deciding whether a sequence covers a window's full span.
const COVERAGE_SLACK_MS: f64 = 1e-6;

/// A `[start_ms, end_ms)` slice of a recording.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<'a> {
    pub start_ms: f64,
    pub end_ms: f64,
    /// Nominal rate of the parent sequence.
    pub rate_hz: f64,
    pub samples: &'a [GazeSample],
}

impl Window<'_> {
    pub fn span(&self) -> (f64, f64) {
        (self.start_ms, self.end_ms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledWindow<'a> {
    pub window: Window<'a>,
    pub target: f64,
    pub dimension: Dimension,
}

/// Number of complete windows that fit in `duration_ms`.
pub fn window_count(duration_ms: f64, window_ms: f64, hop_ms: f64) -> usize {
    if duration_ms + COVERAGE_SLACK_MS < window_ms {
        return 0;
    }
    ((duration_ms - window_ms + COVERAGE_SLACK_MS) / hop_ms).floor() as usize + 1
}

/// Cuts `seq` into windows of `window_s` seconds starting every `hop_s`
/// seconds from the first sample. Trailing partial windows are dropped.
pub fn segment(seq: &GazeSequence, window_s: f64, hop_s: f64) -> Result<Vec<Window<'_>>> {
    if !(window_s > 0.0 && window_s.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "window_s",
            message: format!("must be positive, got {window_s}"),
        });
    }
    if !(hop_s > 0.0 && hop_s.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "hop_s",
            message: format!("must be positive, got {hop_s}"),
        });
    }
    if seq.is_empty() {
        return Err(Error::Empty { what: "gaze sequence" });
    }
    let window_ms = window_s * 1000.0;
    let hop_ms = hop_s * 1000.0;
    let samples = seq.samples();
    let origin = seq.start_ms();
    let count = window_count(seq.duration_ms(), window_ms, hop_ms);
    Ok((0..count)
        .map(|i| {
            let start_ms = origin + i as f64 * hop_ms;
            let end_ms = start_ms + window_ms;
            let lo = samples.partition_point(|s| s.timestamp_ms < start_ms);
            let hi = samples.partition_point(|s| s.timestamp_ms < end_ms);
            Window {
                start_ms,
                end_ms,
                rate_hz: seq.nominal_rate_hz(),
                samples: &samples[lo..hi],
            }
        })
        .collect())
}

/// Computes one target per `[start, end)` span: the mean of the annotation
/// points inside the span, or the last value at or before `start` when the
/// span holds no point.
///
/// A span is uncovered (error) when the track has no point at or before its
/// end, or when the track ends before the span starts.
pub fn align_spans(spans: &[(f64, f64)], track: &AnnotationTrack) -> Result<Vec<f64>> {
    let points = track.points();
    let last_ts = points[points.len() - 1].0;
    spans
        .iter()
        .map(|&(start, end)| {
            if last_ts < start {
                return Err(Error::AnnotationCoverage {
                    start_ms: start,
                    end_ms: end,
                });
            }
            let lo = points.partition_point(|p| p.0 < start);
            let hi = points.partition_point(|p| p.0 < end);
            if hi > lo {
                let inside = &points[lo..hi];
                Ok(inside.iter().map(|p| p.1).sum::<f64>() / inside.len() as f64)
            } else {
                let at_or_before = points.partition_point(|p| p.0 <= start);
                if at_or_before == 0 {
                    Err(Error::AnnotationCoverage {
                        start_ms: start,
                        end_ms: end,
                    })
                } else {
                    Ok(points[at_or_before - 1].1)
                }
            }
        })
        .collect()
}

/// Pairs each window with its target from `track`. See [`align_spans`].
pub fn align_annotations<'a>(windows: &[Window<'a>], track: &AnnotationTrack) -> Result<Vec<LabeledWindow<'a>>> {
    let spans: Vec<(f64, f64)> = windows.iter().map(Window::span).collect();
    let targets = align_spans(&spans, track)?;
    Ok(windows
        .iter()
        .zip(targets)
        .map(|(w, target)| LabeledWindow {
            window: *w,
            target,
            dimension: track.dimension(),
        })
        .collect())
}
