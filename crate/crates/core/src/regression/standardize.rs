use super::TrainingSet;
use crate::error::{Error, Result};
use crate::features::stats::{mean, sample_std};

/// Per-feature and target z-scoring parameters.
///
/// Zero-variance columns keep their mean and get the sentinel std 1, so
/// they standardize to all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    pub target_mean: f64,
    pub target_std: f64,
}

/// Mean, exact for constant inputs so they standardize to exactly zero.
fn centre(values: &[f64]) -> f64 {
    match values.first() {
        Some(&first) if values.iter().all(|v| *v == first) => first,
        _ => mean(values),
    }
}

fn std_or_sentinel(values: &[f64]) -> f64 {
    let s = sample_std(values);
    if s > 0.0 && s.is_finite() {
        s
    } else {
        1.0
    }
}

impl Standardization {
    pub fn features(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.feature_means.iter().zip(&self.feature_stds))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn target(&self, y: f64) -> f64 {
        (y - self.target_mean) / self.target_std
    }

    pub fn unstandardize_features(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.feature_means.iter().zip(&self.feature_stds))
            .map(|(z, (m, s))| z * s + m)
            .collect()
    }

    pub fn unstandardize_target(&self, z: f64) -> f64 {
        z * self.target_std + self.target_mean
    }
}

/// Fits z-scoring on `data` and returns the standardized rows and targets.
pub fn standardize_fit(data: &TrainingSet) -> Result<(Standardization, Vec<Vec<f64>>, Vec<f64>)> {
    if data.len() < 2 {
        return Err(Error::TooFewSamples {
            what: "standardization",
            needed: 2,
            got: data.len(),
        });
    }
    if data.rows().iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "training features".into(),
        });
    }
    let d = data.n_features();
    let columns: Vec<Vec<f64>> = (0..d).map(|j| data.column(j)).collect();
    let params = Standardization {
        feature_means: columns.iter().map(|c| centre(c)).collect(),
        feature_stds: columns.iter().map(|c| std_or_sentinel(c)).collect(),
        target_mean: centre(data.targets()),
        target_std: std_or_sentinel(data.targets()),
    };
    let rows: Vec<Vec<f64>> = data.rows().iter().map(|r| params.features(r)).collect();
    let targets: Vec<f64> = data.targets().iter().map(|&y| params.target(y)).collect();
    Ok((params, rows, targets))
}
