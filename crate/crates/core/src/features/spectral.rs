//! Zero-padded periodogram band powers for the gaze coordinate series.
//!
//! The periodogram of a length-`N` series zero-padded to `nfft` points is
//! `P[k] = |X[k]|^2 / N`, at frequency `k * rate / nfft`. Summed over all
//! `N` unpadded bins it equals `sum(x^2)`, i.e. `N` times the population
//! variance of the mean-removed series.

use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{FeatureConfig, PsdMode};
use crate::error::{Error, Result};

/// Number of band powers per axis.
pub const BAND_COUNT: usize = 5;

/// The single-bin bands (b1, b2), in Hz or cycles/frame.
const POINT_BANDS: [f64; 2] = [0.011, 0.022];
/// The averaged bands (b3..b5), in Hz or cycles/frame.
const RANGE_BANDS: [(f64, f64); 3] = [(0.033, 0.044), (0.055, 0.066), (0.077, 0.133)];

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn power_spectrum(series: &[f64], nfft: usize) -> Vec<f64> {
    let n = series.len();
    assert!(nfft >= n && n > 0, "nfft must cover the series");
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&x| Complex::new(x, 0.0)).collect();
    buf.resize(nfft, Complex::new(0.0, 0.0));
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(nfft));
    fft.process(&mut buf);
    buf.iter().map(|c| c.norm_sqr() / n as f64).collect()
}

/// One-sided periodogram `|X[k]|^2 / N` for `k = 0..=nfft/2` of `series`
/// zero-padded to `nfft` points. No mean removal happens here.
pub fn periodogram(series: &[f64], nfft: usize) -> Vec<f64> {
    let mut p = power_spectrum(series, nfft);
    p.truncate(nfft / 2 + 1);
    p
}

/// Full two-sided periodogram over all `nfft` bins.
pub fn periodogram_two_sided(series: &[f64], nfft: usize) -> Vec<f64> {
    power_spectrum(series, nfft)
}

/// Padded transform length: at least the series length, and large enough
/// that the bin spacing `rate_hz / nfft` does not exceed `resolution_hz`.
pub fn padded_len(n: usize, rate_hz: f64, resolution_hz: f64) -> usize {
    let needed = (rate_hz / resolution_hz).ceil() as usize;
    needed.max(n)
}

/// Band edges in Hz for the given mode and rate: two point frequencies and
/// three closed ranges.
pub fn band_edges_hz(mode: PsdMode, rate_hz: f64) -> ([f64; 2], [(f64, f64); 3]) {
    let scale = match mode {
        PsdMode::AbsoluteHz => 1.0,
        PsdMode::Normalized => rate_hz,
    };
    (
        POINT_BANDS.map(|f| f * scale),
        RANGE_BANDS.map(|(lo, hi)| (lo * scale, hi * scale)),
    )
}

/// The five band powers of a mean-removed, zero-padded periodogram.
///
/// b1 and b2 take the bin nearest their frequency; b3..b5 average the bins
/// whose frequency falls inside the closed band. A range band with no bin
/// inside (only possible past Nyquist) falls back to the bin nearest its
/// centre.
pub fn band_psd(series: &[f64], rate_hz: f64, config: &FeatureConfig) -> Result<[f64; BAND_COUNT]> {
    if series.len() < 2 {
        return Err(Error::TooFewSamples {
            what: "band power",
            needed: 2,
            got: series.len(),
        });
    }
    if !(rate_hz > 0.0 && rate_hz.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "rate_hz",
            message: format!("must be positive, got {rate_hz}"),
        });
    }
    let m = super::stats::mean(series);
    let centred: Vec<f64> = series.iter().map(|x| x - m).collect();
    let nfft = padded_len(series.len(), rate_hz, config.psd_pad_resolution_hz);
    let spectrum = periodogram(&centred, nfft);
    let last = spectrum.len() - 1;
    let bin_hz = rate_hz / nfft as f64;
    let nearest = |f: f64| ((f / bin_hz).round().max(0.0) as usize).min(last);

    let (points, ranges) = band_edges_hz(config.psd_mode, rate_hz);
    let mut out = [0.0; BAND_COUNT];
    for (slot, f) in out.iter_mut().zip(points) {
        *slot = spectrum[nearest(f)];
    }
    for (slot, (lo, hi)) in out[2..].iter_mut().zip(ranges) {
        let first = (lo / bin_hz).ceil() as usize;
        let mut sum = 0.0;
        let mut count = 0usize;
        for (k, p) in spectrum.iter().enumerate().skip(first) {
            let f = k as f64 * bin_hz;
            if f < lo {
                continue;
            }
            if f > hi {
                break;
            }
            sum += p;
            count += 1;
        }
        *slot = if count > 0 {
            sum / count as f64
        } else {
            spectrum[nearest(0.5 * (lo + hi))]
        };
    }
    Ok(out)
}
