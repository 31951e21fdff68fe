//! Direct-summation periodograms.

use std::f64::consts::TAU;

/// `|sum_n x[n] exp(-2 pi i k n / nfft)|^2 / N` evaluated by direct sum,
/// with the phase reduced modulo `nfft` in integer arithmetic.
pub fn dft_power(xs: &[f64], k: usize, nfft: usize) -> f64 {
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for (n, &x) in xs.iter().enumerate() {
        let phase = ((k as u128 * n as u128) % nfft as u128) as f64 / nfft as f64;
        let a = TAU * phase;
        re += x * a.cos();
        im -= x * a.sin();
    }
    (re * re + im * im) / xs.len() as f64
}

/// All `N` bins of the unpadded periodogram.
pub fn full_periodogram(xs: &[f64]) -> Vec<f64> {
    (0..xs.len()).map(|k| dft_power(xs, k, xs.len())).collect()
}

/// Reference band powers. Mirrors the documented rules: mean removal, zero
/// padding to `max(N, ceil(rate / resolution))` points, nearest bin for the
/// two point bands, bin mean over the closed range bands (nearest bin to the
/// centre if a range holds none). `normalized` scales band edges by `rate`.
pub fn band_powers(xs: &[f64], rate: f64, resolution: f64, normalized: bool) -> [f64; 5] {
    let m = super::stats::mean(xs);
    let centred: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let nfft = ((rate / resolution).ceil() as usize).max(xs.len());
    let bin_hz = rate / nfft as f64;
    let half = nfft / 2;
    let scale = if normalized { rate } else { 1.0 };
    let nearest = |f: f64| -> usize {
        let k = (f / bin_hz).round();
        (k.max(0.0) as usize).min(half)
    };
    let mut out = [0.0; 5];
    out[0] = dft_power(&centred, nearest(0.011 * scale), nfft);
    out[1] = dft_power(&centred, nearest(0.022 * scale), nfft);
    let ranges = [(0.033, 0.044), (0.055, 0.066), (0.077, 0.133)];
    for (slot, (lo, hi)) in out[2..].iter_mut().zip(ranges) {
        let (lo, hi) = (lo * scale, hi * scale);
        let ks: Vec<usize> = (0..=half)
            .filter(|&k| {
                let f = k as f64 * bin_hz;
                f >= lo && f <= hi
            })
            .collect();
        *slot = if ks.is_empty() {
            dft_power(&centred, nearest(0.5 * (lo + hi)), nfft)
        } else {
            ks.iter().map(|&k| dft_power(&centred, k, nfft)).sum::<f64>() / ks.len() as f64
        };
    }
    out
}
