//! Gaze recordings and affect annotation tracks: parsing, validation and
//! deterministic synthesis.
//!
//! Gaze CSV columns (header required, any order, extra columns ignored):
//!
//! ```text
//! frame,timestamp_ms,gaze_x,gaze_y,screen_distance_mm,eye_closed
//! ```
//!
//! `eye_closed` is `0` or `1`. A recording may carry `eyelid_aperture`
//! instead, in which case a frame counts as closed when the aperture is at or
//! below [`IngestConfig::closure_threshold`].
//!
//! Annotation CSV columns are `timestamp_ms,value`; the header row is
//! optional.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affect dimension modelled by a target track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Arousal,
    Valence,
}

impl Dimension {
    pub fn as_str(&self) -> &'static str {
        match self {
            Dimension::Arousal => "arousal",
            Dimension::Valence => "valence",
        }
    }

    /// Complexity constant used for gaze models of this dimension.
    pub fn default_complexity(&self) -> f64 {
        match self {
            Dimension::Arousal => 0.091,
            Dimension::Valence => 0.0325,
        }
    }

    /// Valence training drops rows annotated exactly 0.0; arousal keeps them.
    pub fn drops_zero_targets_by_default(&self) -> bool {
        matches!(self, Dimension::Valence)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "arousal" => Ok(Dimension::Arousal),
            "valence" => Ok(Dimension::Valence),
            other => Err(Error::InvalidParameter {
                name: "dimension",
                message: format!("expected `arousal` or `valence`, got `{other}`"),
            }),
        }
    }
}

/// One frame of gaze data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeSample {
    pub frame_index: u64,
    /// Milliseconds since the start of the recording.
    pub timestamp_ms: f64,
    /// Horizontal gaze coordinate, normalized screen units.
    pub gaze_x: f64,
    /// Vertical gaze coordinate, normalized screen units.
    pub gaze_y: f64,
    pub screen_distance_mm: f64,
    pub eye_closed: bool,
}

/// An ordered, validated recording.
///
/// Timestamps are strictly increasing and there are at least two samples, so
/// the nominal rate is always defined. Gaze coordinates are *not* required to
/// be finite here; [`validate_sequence`] counts the bad cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GazeSequence {
    samples: Vec<GazeSample>,
    nominal_rate_hz: f64,
    source_id: String,
}

impl GazeSequence {
    pub fn new(source_id: impl Into<String>, samples: Vec<GazeSample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::TooFewSamples {
                what: "gaze sequence",
                needed: 2,
                got: samples.len(),
            });
        }
        for (i, pair) in samples.windows(2).enumerate() {
            if !(pair[1].timestamp_ms > pair[0].timestamp_ms) {
                return Err(Error::NonMonotonicTimestamp {
                    row: i + 2,
                    previous: pair[0].timestamp_ms,
                    current: pair[1].timestamp_ms,
                });
            }
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.timestamp_ms.is_finite() {
                return Err(Error::OutOfRange {
                    row: i + 1,
                    what: "timestamp_ms",
                    value: s.timestamp_ms,
                });
            }
            if !(s.screen_distance_mm > 0.0) {
                return Err(Error::OutOfRange {
                    row: i + 1,
                    what: "screen_distance_mm",
                    value: s.screen_distance_mm,
                });
            }
        }
        let mut rates: Vec<f64> = samples
            .windows(2)
            .map(|p| 1000.0 / (p[1].timestamp_ms - p[0].timestamp_ms))
            .collect();
        let nominal_rate_hz = median(&mut rates);
        Ok(Self {
            samples,
            nominal_rate_hz,
            source_id: source_id.into(),
        })
    }

    pub fn samples(&self) -> &[GazeSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Median of the per-step instantaneous frame rates.
    pub fn nominal_rate_hz(&self) -> f64 {
        self.nominal_rate_hz
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Nominal frame interval in milliseconds.
    pub fn frame_interval_ms(&self) -> f64 {
        1000.0 / self.nominal_rate_hz
    }

    /// Covered span: first timestamp up to one nominal frame past the last.
    pub fn duration_ms(&self) -> f64 {
        let first = self.samples[0].timestamp_ms;
        let last = self.samples[self.samples.len() - 1].timestamp_ms;
        last - first + self.frame_interval_ms()
    }

    pub fn start_ms(&self) -> f64 {
        self.samples[0].timestamp_ms
    }
}

/// Median; sorts the input in place. Empty input yields NaN.
fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestConfig {
    /// Eyelid aperture at or below which a frame counts as closed.
    pub closure_threshold: f64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            closure_threshold: 0.15,
        }
    }
}

const GAZE_COLUMNS: [&str; 5] = ["frame", "timestamp_ms", "gaze_x", "gaze_y", "screen_distance_mm"];

fn column_index(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn parse_cell<T: FromStr>(record: &csv::StringRecord, idx: usize, row: usize, column: &str) -> Result<T> {
    let raw = record.get(idx).unwrap_or("").trim();
    raw.parse::<T>().map_err(|_| Error::ParseCell {
        row,
        column: column.to_string(),
        value: raw.to_string(),
    })
}

fn csv_error(row: usize, err: csv::Error) -> Error {
    match err.kind() {
        csv::ErrorKind::Io(_) => match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        },
        _ => Error::MalformedRecord {
            row,
            message: err.to_string(),
        },
    }
}

/// Parses a gaze CSV into a validated [`GazeSequence`].
///
/// Row numbers in errors count data rows from 1 (the header is not counted).
pub fn parse_gaze_csv<R: Read>(input: R, source_id: &str, config: &IngestConfig) -> Result<GazeSequence> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers().map_err(|e| csv_error(0, e))?.clone();

    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(GAZE_COLUMNS) {
        *slot = column_index(&headers, name).ok_or_else(|| Error::MissingColumn {
            column: name.to_string(),
        })?;
    }
    let closed_idx = column_index(&headers, "eye_closed");
    let aperture_idx = column_index(&headers, "eyelid_aperture");
    if closed_idx.is_none() && aperture_idx.is_none() {
        return Err(Error::MissingColumn {
            column: "eye_closed".to_string(),
        });
    }

    let mut samples: Vec<GazeSample> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| csv_error(row, e))?;
        let eye_closed = match (closed_idx, aperture_idx) {
            (Some(c), _) => match record.get(c).unwrap_or("").trim() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::ParseCell {
                        row,
                        column: "eye_closed".into(),
                        value: other.into(),
                    })
                }
            },
            (None, Some(a)) => {
                let aperture: f64 = parse_cell(&record, a, row, "eyelid_aperture")?;
                if !(aperture >= 0.0) {
                    return Err(Error::OutOfRange {
                        row,
                        what: "eyelid_aperture",
                        value: aperture,
                    });
                }
                aperture <= config.closure_threshold
            }
            (None, None) => unreachable!(),
        };
        let sample = GazeSample {
            frame_index: parse_cell(&record, idx[0], row, GAZE_COLUMNS[0])?,
            timestamp_ms: parse_cell(&record, idx[1], row, GAZE_COLUMNS[1])?,
            gaze_x: parse_cell(&record, idx[2], row, GAZE_COLUMNS[2])?,
            gaze_y: parse_cell(&record, idx[3], row, GAZE_COLUMNS[3])?,
            screen_distance_mm: parse_cell(&record, idx[4], row, GAZE_COLUMNS[4])?,
            eye_closed,
        };
        if !sample.timestamp_ms.is_finite() {
            return Err(Error::OutOfRange {
                row,
                what: "timestamp_ms",
                value: sample.timestamp_ms,
            });
        }
        if let Some(prev) = samples.last() {
            if !(sample.timestamp_ms > prev.timestamp_ms) {
                return Err(Error::NonMonotonicTimestamp {
                    row,
                    previous: prev.timestamp_ms,
                    current: sample.timestamp_ms,
                });
            }
        }
        if !(sample.screen_distance_mm > 0.0) {
            return Err(Error::OutOfRange {
                row,
                what: "screen_distance_mm",
                value: sample.screen_distance_mm,
            });
        }
        samples.push(sample);
    }
    GazeSequence::new(source_id, samples)
}

/// Writes a sequence in the canonical gaze CSV layout (with `eye_closed`).
///
/// Floats use the shortest representation that parses back to the same
/// value, so `parse_gaze_csv(write_gaze_csv(seq))` reproduces `seq`.
pub fn write_gaze_csv<W: Write>(seq: &GazeSequence, mut out: W) -> Result<()> {
    writeln!(out, "frame,timestamp_ms,gaze_x,gaze_y,screen_distance_mm,eye_closed")?;
    for s in seq.samples() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.frame_index,
            s.timestamp_ms,
            s.gaze_x,
            s.gaze_y,
            s.screen_distance_mm,
            u8::from(s.eye_closed)
        )?;
    }
    Ok(())
}

/// A time-ordered affect trace for one dimension, values in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationTrack {
    dimension: Dimension,
    points: Vec<(f64, f64)>,
}

impl AnnotationTrack {
    pub fn new(dimension: Dimension, points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty {
                what: "annotation track",
            });
        }
        for (i, &(t, v)) in points.iter().enumerate() {
            let row = i + 1;
            if !t.is_finite() {
                return Err(Error::OutOfRange {
                    row,
                    what: "timestamp_ms",
                    value: t,
                });
            }
            if !(v.is_finite() && (-1.0..=1.0).contains(&v)) {
                return Err(Error::OutOfRange {
                    row,
                    what: "annotation",
                    value: v,
                });
            }
            if i > 0 && !(t > points[i - 1].0) {
                return Err(Error::NonMonotonicTimestamp {
                    row,
                    previous: points[i - 1].0,
                    current: t,
                });
            }
        }
        Ok(Self { dimension, points })
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    /// `(timestamp_ms, value)` pairs.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Parses an annotation CSV (`timestamp_ms,value`, header optional).
pub fn parse_annotation_csv<R: Read>(input: R, dimension: Dimension) -> Result<AnnotationTrack> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut points = Vec::new();
    let mut row = 0usize;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(row + 1, e))?;
        if i == 0 && record.get(0).is_some_and(|c| c.parse::<f64>().is_err()) {
            // header row
            if record.len() < 2 {
                return Err(Error::MissingColumn { column: "value".into() });
            }
            continue;
        }
        row += 1;
        if record.len() < 2 {
            return Err(Error::MalformedRecord {
                row,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let t: f64 = parse_cell(&record, 0, row, "timestamp_ms")?;
        let v: f64 = parse_cell(&record, 1, row, "value")?;
        points.push((t, v));
    }
    AnnotationTrack::new(dimension, points)
}

pub fn write_annotation_csv<W: Write>(track: &AnnotationTrack, mut out: W) -> Result<()> {
    writeln!(out, "timestamp_ms,value")?;
    for (t, v) in track.points() {
        writeln!(out, "{t},{v}")?;
    }
    Ok(())
}

/// Summary produced by [`validate_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub sample_count: usize,
    pub duration_ms: f64,
    pub median_gap_ms: f64,
    pub max_gap_ms: f64,
    /// `max_gap_ms / median_gap_ms`; 1.0 for a perfectly uniform rate.
    pub jitter_ratio: f64,
    /// Number of non-finite gaze coordinate or distance cells.
    pub non_finite_count: usize,
    /// False when some inter-frame gap exceeds twice the window hop.
    pub usable: bool,
}

impl ValidationReport {
    /// Usable and free of non-finite cells.
    pub fn is_clean(&self) -> bool {
        self.usable && self.non_finite_count == 0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} samples, {:.1} ms, median gap {:.3} ms, max gap {:.3} ms, jitter {:.3}, {} non-finite cells, {}",
            self.sample_count,
            self.duration_ms,
            self.median_gap_ms,
            self.max_gap_ms,
            self.jitter_ratio,
            self.non_finite_count,
            if self.usable { "usable" } else { "UNUSABLE" }
        )
    }
}

/// Reports timing regularity and bad cells. `hop_ms` is the window hop the
/// sequence will be segmented with.
pub fn validate_sequence(seq: &GazeSequence, hop_ms: f64) -> ValidationReport {
    let mut gaps: Vec<f64> = seq
        .samples()
        .windows(2)
        .map(|p| p[1].timestamp_ms - p[0].timestamp_ms)
        .collect();
    let max_gap_ms = gaps.iter().copied().fold(0.0, f64::max);
    let median_gap_ms = median(&mut gaps);
    let non_finite_count = seq
        .samples()
        .iter()
        .map(|s| {
            [s.gaze_x, s.gaze_y, s.screen_distance_mm]
                .iter()
                .filter(|v| !v.is_finite())
                .count()
        })
        .sum();
    ValidationReport {
        sample_count: seq.len(),
        duration_ms: seq.duration_ms(),
        median_gap_ms,
        max_gap_ms,
        jitter_ratio: max_gap_ms / median_gap_ms,
        non_finite_count,
        usable: max_gap_ms <= 2.0 * hop_ms,
    }
}

/// One additive component of a synthetic channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Constant {
        value: f64,
    },
    Ramp {
        start: f64,
        slope_per_s: f64,
    },
    Sinusoid {
        frequency_hz: f64,
        amplitude: f64,
        #[serde(default)]
        phase_rad: f64,
    },
    /// Independent Gaussian noise per frame.
    Noise {
        std_dev: f64,
    },
    /// Piecewise-constant fixations: holds a uniform random level in
    /// `[-amplitude, amplitude]` for an exponentially distributed dwell, then
    /// jumps.
    Fixations {
        mean_dwell_s: f64,
        amplitude: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlinkSchedule {
    None,
    Periodic {
        period_s: f64,
        duration_frames: usize,
        #[serde(default)]
        offset_s: f64,
    },
    /// Blink onsets as a Bernoulli process with the given mean rate; each
    /// blink lasts a uniform number of frames in `[min_frames, max_frames]`.
    Random {
        rate_per_s: f64,
        min_frames: usize,
        max_frames: usize,
    },
}

/// Parameters for [`synthesize_sequence`]. Each channel is the sum of its
/// generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisSpec {
    pub source_id: String,
    pub duration_s: f64,
    pub rate_hz: f64,
    pub gaze_x: Vec<Generator>,
    pub gaze_y: Vec<Generator>,
    pub distance_mm: Vec<Generator>,
    pub blinks: BlinkSchedule,
}

impl Default for SynthesisSpec {
    fn default() -> Self {
        Self {
            source_id: "synthetic".into(),
            duration_s: 60.0,
            rate_hz: 30.0,
            gaze_x: vec![Generator::Constant { value: 0.0 }],
            gaze_y: vec![Generator::Constant { value: 0.0 }],
            distance_mm: vec![Generator::Constant { value: 600.0 }],
            blinks: BlinkSchedule::None,
        }
    }
}

fn render_channel(generators: &[Generator], n: usize, rate_hz: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let mut out = vec![0.0; n];
    for g in generators {
        match *g {
            Generator::Constant { value } => out.iter_mut().for_each(|v| *v += value),
            Generator::Ramp { start, slope_per_s } => {
                for (i, v) in out.iter_mut().enumerate() {
                    *v += start + slope_per_s * (i as f64 / rate_hz);
                }
            }
            Generator::Sinusoid {
                frequency_hz,
                amplitude,
                phase_rad,
            } => {
                for (i, v) in out.iter_mut().enumerate() {
                    let t = i as f64 / rate_hz;
                    *v += amplitude * (std::f64::consts::TAU * frequency_hz * t + phase_rad).sin();
                }
            }
            Generator::Noise { std_dev } => {
                let normal = Normal::new(0.0, std_dev).map_err(|e| Error::InvalidParameter {
                    name: "std_dev",
                    message: e.to_string(),
                })?;
                out.iter_mut().for_each(|v| *v += normal.sample(rng));
            }
            Generator::Fixations {
                mean_dwell_s,
                amplitude,
            } => {
                if !(mean_dwell_s > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "mean_dwell_s",
                        message: "must be positive".into(),
                    });
                }
                let p_jump = (1.0 / (mean_dwell_s * rate_hz)).min(1.0);
                let mut level = rng.random_range(-1.0..=1.0) * amplitude;
                for v in out.iter_mut() {
                    if rng.random_bool(p_jump) {
                        level = rng.random_range(-1.0..=1.0) * amplitude;
                    }
                    *v += level;
                }
            }
        }
    }
    Ok(out)
}

fn render_blinks(schedule: &BlinkSchedule, n: usize, rate_hz: f64, rng: &mut ChaCha8Rng) -> Result<Vec<bool>> {
    let mut closed = vec![false; n];
    match *schedule {
        BlinkSchedule::None => {}
        BlinkSchedule::Periodic {
            period_s,
            duration_frames,
            offset_s,
        } => {
            if !(period_s > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "period_s",
                    message: "must be positive".into(),
                });
            }
            let mut onset_s = offset_s;
            while onset_s < n as f64 / rate_hz {
                let start = (onset_s * rate_hz).round() as usize;
                for flag in closed.iter_mut().skip(start).take(duration_frames) {
                    *flag = true;
                }
                onset_s += period_s;
            }
        }
        BlinkSchedule::Random {
            rate_per_s,
            min_frames,
            max_frames,
        } => {
            if min_frames == 0 || max_frames < min_frames || !(rate_per_s >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "blinks",
                    message: "need 0 < min_frames <= max_frames and rate_per_s >= 0".into(),
                });
            }
            let p_onset = (rate_per_s / rate_hz).min(1.0);
            let mut i = 0;
            while i < n {
                if rng.random_bool(p_onset) {
                    let len = rng.random_range(min_frames..=max_frames);
                    let end = (i + len).min(n);
                    closed[i..end].iter_mut().for_each(|f| *f = true);
                    // at least one open frame between blinks
                    i = end + 1;
                } else {
                    i += 1;
                }
            }
        }
    }
    Ok(closed)
}

/// Builds a deterministic recording from `spec`; a pure function of
/// `(spec, seed)`.
///
/// The sample count is `round(duration_s * rate_hz)` and sample `i` sits at
/// `i * 1000 / rate_hz` ms.
pub fn synthesize_sequence(spec: &SynthesisSpec, seed: u64) -> Result<GazeSequence> {
    if !(spec.duration_s > 0.0 && spec.duration_s.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "duration_s",
            message: format!("must be positive, got {}", spec.duration_s),
        });
    }
    if !(spec.rate_hz > 0.0 && spec.rate_hz.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "rate_hz",
            message: format!("must be positive, got {}", spec.rate_hz),
        });
    }
    let n = (spec.duration_s * spec.rate_hz).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = render_channel(&spec.gaze_x, n, spec.rate_hz, &mut rng)?;
    let ys = render_channel(&spec.gaze_y, n, spec.rate_hz, &mut rng)?;
    let ds = render_channel(&spec.distance_mm, n, spec.rate_hz, &mut rng)?;
    let closed = render_blinks(&spec.blinks, n, spec.rate_hz, &mut rng)?;
    if let Some(bad) = ds.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "distance_mm",
            message: format!("profile must stay positive, reached {bad}"),
        });
    }
    let samples = (0..n)
        .map(|i| GazeSample {
            frame_index: i as u64,
            timestamp_ms: i as f64 * 1000.0 / spec.rate_hz,
            gaze_x: xs[i],
            gaze_y: ys[i],
            screen_distance_mm: ds[i],
            eye_closed: closed[i],
        })
        .collect();
    GazeSequence::new(spec.source_id.clone(), samples)
}
