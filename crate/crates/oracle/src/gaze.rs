//! Reference event features and the full 31-slot vector.

use super::spectral::band_powers;
use super::stats::{describe, mean, sample_std, skewness};

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub velocity_threshold: f64,
    pub approach_delta_mm: f64,
    pub zone_grid: usize,
    /// `(x_min, x_max, y_min, y_max)`
    pub zone_bounds: (f64, f64, f64, f64),
    pub normalized_psd: bool,
    pub psd_resolution_hz: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            velocity_threshold: 0.5,
            approach_delta_mm: 0.0,
            zone_grid: 3,
            zone_bounds: (-1.0, 1.0, -1.0, 1.0),
            normalized_psd: false,
            psd_resolution_hz: 0.011,
        }
    }
}

/// `(timestamp_ms, x, y, distance_mm, closed)`
pub type Frame = (f64, f64, f64, f64, bool);

fn mean_std_or_zero(v: &[f64]) -> (f64, f64) {
    match v.len() {
        0 => (0.0, 0.0),
        1 => (v[0], 0.0),
        _ => (mean(v), sample_std(v)),
    }
}

/// Lengths of maximal runs of `true`, found by scanning for rising and
/// falling edges.
fn run_lengths(flags: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if flags[i] {
            let start = i;
            while i < flags.len() && flags[i] {
                i += 1;
            }
            out.push((start, i - start));
        } else {
            i += 1;
        }
    }
    out
}

pub fn zone_stats(xs: &[f64], ys: &[f64], use_x: bool, cfg: &OracleConfig) -> (f64, f64) {
    let g = cfg.zone_grid;
    let (x0, x1, y0, y1) = cfg.zone_bounds;
    let cell = |v: f64, lo: f64, hi: f64| -> usize {
        let rel = (v - lo) / (hi - lo) * g as f64;
        if rel < 0.0 {
            0
        } else if rel >= g as f64 {
            g - 1
        } else {
            rel.floor() as usize
        }
    };
    let mut spreads = Vec::new();
    for cy in 0..g {
        for cx in 0..g {
            let members: Vec<f64> = xs
                .iter()
                .zip(ys)
                .filter(|(x, y)| cell(**x, x0, x1) == cx && cell(**y, y0, y1) == cy)
                .map(|(x, y)| if use_x { *x } else { *y })
                .collect();
            if members.len() >= 2 {
                spreads.push(sample_std(&members));
            }
        }
    }
    mean_std_or_zero(&spreads)
}

pub fn scan_paths(xs: &[f64], ys: &[f64], ts: &[f64], cfg: &OracleConfig) -> (f64, f64) {
    let mut lengths = Vec::new();
    let mut current: Option<f64> = None;
    for i in 1..xs.len() {
        let d = ((xs[i] - xs[i - 1]).powi(2) + (ys[i] - ys[i - 1]).powi(2)).sqrt();
        let speed = d / ((ts[i] - ts[i - 1]) / 1000.0);
        if speed > cfg.velocity_threshold {
            *current.get_or_insert(0.0) += d;
        } else if let Some(len) = current.take() {
            lengths.push(len);
        }
    }
    lengths.extend(current);
    mean_std_or_zero(&lengths)
}

pub fn approach(ds: &[f64], ts: &[f64], cfg: &OracleConfig) -> (f64, f64) {
    let flags: Vec<bool> = (1..ds.len())
        .map(|i| ds[i - 1] - ds[i] > cfg.approach_delta_mm)
        .collect();
    let runs = run_lengths(&flags);
    if runs.is_empty() {
        return (0.0, 0.0);
    }
    let ratio = flags.iter().filter(|f| **f).count() as f64 / flags.len() as f64;
    let durations: Vec<f64> = runs.iter().map(|&(s, l)| ts[s + l] - ts[s]).collect();
    (ratio, mean(&durations))
}

pub fn closure(flags: &[bool]) -> (f64, f64, f64) {
    let lens: Vec<f64> = run_lengths(flags).iter().map(|r| r.1 as f64).collect();
    match lens.len() {
        0 => (0.0, 0.0, 0.0),
        1 => (lens[0], 0.0, 0.0),
        _ => (mean(&lens), sample_std(&lens), skewness(&lens)),
    }
}

/// The 31-slot vector for one window of frames sampled at `rate_hz`.
pub fn feature_vector(frames: &[Frame], rate_hz: f64, cfg: &OracleConfig) -> [f64; 31] {
    let ts: Vec<f64> = frames.iter().map(|f| f.0).collect();
    let xs: Vec<f64> = frames.iter().map(|f| f.1).collect();
    let ys: Vec<f64> = frames.iter().map(|f| f.2).collect();
    let ds: Vec<f64> = frames.iter().map(|f| f.3).collect();
    let closed: Vec<bool> = frames.iter().map(|f| f.4).collect();

    let mut v = Vec::with_capacity(31);
    let (ratio, time) = approach(&ds, &ts, cfg);
    v.push(ratio);
    v.push(time);
    let (sa, ss) = scan_paths(&xs, &ys, &ts, cfg);
    v.push(sa);
    v.push(ss);
    for (series, use_x) in [(&xs, true), (&ys, false)] {
        let (m, sd, sk, iqr12, iqr23) = describe(series);
        v.extend([m, iqr12, iqr23, sd, sk]);
        v.extend(band_powers(series, rate_hz, cfg.psd_resolution_hz, cfg.normalized_psd));
        let (za, zs) = zone_stats(&xs, &ys, use_x, cfg);
        v.extend([za, zs]);
    }
    let (ca, cs, ck) = closure(&closed);
    v.extend([ca, cs, ck]);
    v.try_into().expect("31 slots")
}
