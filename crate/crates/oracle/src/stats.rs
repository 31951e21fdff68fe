//! Reference descriptive statistics.

/// Neumaier-compensated sum.
pub fn kahan_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(xs: &[f64]) -> f64 {
    kahan_sum(xs) / xs.len() as f64
}

fn central_moment(xs: &[f64], k: i32) -> f64 {
    let m = mean(xs);
    let terms: Vec<f64> = xs.iter().map(|x| (x - m).powi(k)).collect();
    kahan_sum(&terms) / xs.len() as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    (central_moment(xs, 2) * n / (n - 1.0)).sqrt()
}

pub fn skewness(xs: &[f64]) -> f64 {
    let m2 = central_moment(xs, 2);
    if m2 == 0.0 {
        return 0.0;
    }
    central_moment(xs, 3) / (m2 * m2.sqrt())
}

/// Hyndman–Fan type 7: `h = (n - 1) p + 1`, interpolate between the
/// `floor(h)`-th and `ceil(h)`-th smallest values (1-based).
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (sorted.len() as f64 - 1.0) * p + 1.0;
    let lo = h.floor();
    let hi = h.ceil();
    let x_lo = sorted[lo as usize - 1];
    let x_hi = sorted[hi as usize - 1];
    x_lo + (h - lo) * (x_hi - x_lo)
}

/// `(mean, std, skewness, Q2 - Q1, Q3 - Q2)`.
pub fn describe(xs: &[f64]) -> (f64, f64, f64, f64, f64) {
    let q1 = quantile(xs, 0.25);
    let q2 = quantile(xs, 0.5);
    let q3 = quantile(xs, 0.75);
    (mean(xs), sample_std(xs), skewness(xs), q2 - q1, q3 - q2)
}
