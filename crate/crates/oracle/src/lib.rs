//! Brute-force reference computations for the gazecast test suites.
//!
//! Everything here is written from the definitions, without sharing code
//! with the `gazecast` crate: direct DFT sums instead of an FFT, compensated
//! summation for moments, projected gradient plus an active-set linear solve
//! for the SVR dual. It is slow on purpose and only meant for tests.

pub mod gaze;
pub mod qp;
pub mod spectral;
pub mod stats;

/// Windows counted by stepping `start = i * hop` until the window no longer
/// fits in `duration`.
pub fn loop_window_count(duration: f64, window: f64, hop: f64) -> usize {
    let mut count = 0usize;
    while (count as f64) * hop + window <= duration {
        count += 1;
    }
    count
}

/// Pearson correlation from raw sums in a single pass over centred data.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = stats::kahan_sum(a) / n;
    let mb = stats::kahan_sum(b) / n;
    let cov: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let va: Vec<f64> = a.iter().map(|x| (x - ma) * (x - ma)).collect();
    let vb: Vec<f64> = b.iter().map(|y| (y - mb) * (y - mb)).collect();
    let (c, sa, sb) = (stats::kahan_sum(&cov), stats::kahan_sum(&va), stats::kahan_sum(&vb));
    if sa <= 0.0 || sb <= 0.0 {
        return None;
    }
    Some(c / (sa * sb).sqrt())
}

/// Indices of columns sorted by signed correlation with `target`, strongest
/// positive first, ties (and constant columns, scored 0) in column order.
pub fn rank_columns(columns: &[Vec<f64>], target: &[f64]) -> Vec<(usize, f64)> {
    let mut scored: Vec<(usize, f64)> = columns
        .iter()
        .enumerate()
        .map(|(j, c)| (j, pearson(c, target).unwrap_or(0.0)))
        .collect();
    // insertion sort: stable and obviously correct
    for i in 1..scored.len() {
        let mut k = i;
        while k > 0 && scored[k].1 > scored[k - 1].1 {
            scored.swap(k, k - 1);
            k -= 1;
        }
    }
    scored
}

/// Ordinary least squares with intercept; returns `(coefficients, intercept)`.
pub fn ols(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let n = rows.len();
    let d = rows[0].len();
    let x = nalgebra::DMatrix::from_fn(n, d + 1, |i, j| if j < d { rows[i][j] } else { 1.0 });
    let yv = nalgebra::DVector::from_column_slice(y);
    let svd = x.svd(true, true);
    let beta = svd.solve(&yv, 1e-12).expect("svd solve");
    (beta.as_slice()[..d].to_vec(), beta[d])
}
