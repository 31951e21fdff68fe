//! Descriptive statistics shared by the feature extractors.
//!
//! Spreads use the sample (n-1) standard deviation; skewness uses population
//! moments `m3 / m2^1.5`. Degenerate inputs yield 0, never NaN.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptiveStats {
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    /// Q2 - Q1.
    pub iqr_q1q2: f64,
    /// Q3 - Q2.
    pub iqr_q2q3: f64,
}

/// Arithmetic mean with one refinement pass, which removes most of the
/// rounding error of the plain sum when the values share a large offset.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    m + xs.iter().map(|x| x - m).sum::<f64>() / n
}

/// Sample standard deviation; 0 for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Population-moment skewness; 0 when the second moment vanishes.
pub fn skewness(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    let n = xs.len() as f64;
    let (m2, m3) = xs.iter().fold((0.0, 0.0), |(s2, s3), x| {
        let d = x - m;
        (s2 + d * d, s3 + d * d * d)
    });
    let (m2, m3) = (m2 / n, m3 / n);
    if m2 == 0.0 {
        0.0
    } else {
        m3 / m2.powf(1.5)
    }
}

/// Quantile of already-sorted data by linear interpolation between order
/// statistics at position `h = (n - 1) p + 1` (1-based).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn descriptive_stats(series: &[f64]) -> Result<DescriptiveStats> {
    if series.len() < 2 {
        return Err(Error::TooFewSamples {
            what: "descriptive statistics",
            needed: 2,
            got: series.len(),
        });
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let q1 = quantile_sorted(&sorted, 0.25);
    let q2 = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    Ok(DescriptiveStats {
        mean: mean(series),
        std: sample_std(series),
        skewness: skewness(series),
        iqr_q1q2: q2 - q1,
        iqr_q2q3: q3 - q2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_to_eight() {
        let xs: Vec<f64> = (1..=8).map(f64::from).collect();
        let s = descriptive_stats(&xs).unwrap();
        assert_eq!(s.mean, 4.5);
        assert!((s.std - 2.449_489_742_783_178).abs() < 1e-12);
        assert!(s.skewness.abs() < 1e-15);
        assert!((s.iqr_q1q2 - 1.75).abs() < 1e-15);
        assert!((s.iqr_q2q3 - 1.75).abs() < 1e-15);
    }

    #[test]
    fn constant_series_is_all_zero_spread() {
        let s = descriptive_stats(&[5.0; 4]).unwrap();
        assert_eq!(
            s,
            DescriptiveStats {
                mean: 5.0,
                std: 0.0,
                skewness: 0.0,
                iqr_q1q2: 0.0,
                iqr_q2q3: 0.0
            }
        );
    }

    #[test]
    fn negation_flips_mean_and_skew() {
        let xs = [0.3, 1.2, -0.7, 4.0, 2.2, 0.0, 0.1];
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        let a = descriptive_stats(&xs).unwrap();
        let b = descriptive_stats(&neg).unwrap();
        assert!((a.mean + b.mean).abs() < 1e-15);
        assert!((a.skewness + b.skewness).abs() < 1e-12);
        assert!((a.std - b.std).abs() < 1e-15);
        // the two half-IQRs swap roles under negation
        assert!((a.iqr_q1q2 - b.iqr_q2q3).abs() < 1e-12);
        assert!((a.iqr_q2q3 - b.iqr_q1q2).abs() < 1e-12);
    }

    #[test]
    fn too_short() {
        assert!(descriptive_stats(&[1.0]).is_err());
    }
}
