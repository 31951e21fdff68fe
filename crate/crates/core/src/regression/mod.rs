//! Linear epsilon-SVR trained with an SMO dual solver.
//!
//! Features and target are z-scored before fitting; the collapsed linear
//! weights and bias are mapped back to original units, so
//! [`SvrModel::predict`] takes raw feature values.

mod model;
mod smo;
mod standardize;

pub use model::{read_model, write_model, SvrModel};
pub use smo::{kkt_violations, svr_fit, svr_fit_detailed, SvrFit};
pub use standardize::{standardize_fit, Standardization};

use crate::error::{Error, Result};
use crate::features::{feature_names, FeatureVector};
use crate::ingest::Dimension;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrConfig {
    /// Box constraint C on each dual multiplier.
    pub complexity_c: f64,
    /// Half-width of the insensitive tube, in standardized target units.
    pub epsilon: f64,
    /// Stopping threshold on the maximal KKT violation.
    pub tolerance: f64,
    /// Maximum number of two-variable working-set updates.
    pub max_iterations: usize,
    /// Seeds the scan order of the working-set selection.
    pub seed: u64,
}

impl Default for SvrConfig {
    fn default() -> Self {
        Self {
            complexity_c: 1.0,
            epsilon: 0.001,
            tolerance: 0.001,
            max_iterations: 1_000_000,
            seed: 0,
        }
    }
}

impl SvrConfig {
    /// Defaults for a gaze model of `dimension` (C = 0.091 arousal, 0.0325 valence).
    pub fn for_dimension(dimension: Dimension) -> Self {
        Self {
            complexity_c: dimension.default_complexity(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, message: &str| {
            Err(Error::InvalidParameter {
                name,
                message: message.to_string(),
            })
        };
        if !(self.complexity_c > 0.0 && self.complexity_c.is_finite()) {
            return bad("complexity_c", "must be positive");
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon", "must be non-negative");
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad("tolerance", "must be positive");
        }
        Ok(())
    }
}

/// Feature rows with one target each.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    feature_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
    dimension: Option<Dimension>,
}

impl TrainingSet {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        targets: Vec<f64>,
        dimension: Option<Dimension>,
    ) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: targets.len(),
            });
        }
        if let Some(row) = rows.iter().find(|r| r.len() != feature_names.len()) {
            return Err(Error::DimensionMismatch {
                expected: feature_names.len(),
                got: row.len(),
            });
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite {
                what: "training targets".into(),
            });
        }
        Ok(Self {
            feature_names,
            rows,
            targets,
            dimension,
        })
    }

    /// Builds a set over the canonical 31 features.
    pub fn from_vectors(vectors: &[FeatureVector], targets: Vec<f64>, dimension: Option<Dimension>) -> Result<Self> {
        Self::new(
            feature_names().iter().map(|s| s.to_string()).collect(),
            vectors.iter().map(|v| v.as_slice().to_vec()).collect(),
            targets,
            dimension,
        )
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn dimension(&self) -> Option<Dimension> {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Values of feature `j` across all rows.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Projection onto the given feature columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> TrainingSet {
        TrainingSet {
            feature_names: columns.iter().map(|&j| self.feature_names[j].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| columns.iter().map(|&j| r[j]).collect())
                .collect(),
            targets: self.targets.clone(),
            dimension: self.dimension,
        }
    }

    /// The given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> TrainingSet {
        TrainingSet {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
            dimension: self.dimension,
        }
    }
}

/// Drops rows whose target is exactly 0.0, keeping order.
pub fn filter_zero_targets(data: &TrainingSet) -> Result<TrainingSet> {
    let keep: Vec<usize> = (0..data.len()).filter(|&i| data.targets[i] != 0.0).collect();
    if keep.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    Ok(data.select_rows(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(targets: &[f64]) -> TrainingSet {
        TrainingSet::new(
            vec!["a".into()],
            targets.iter().enumerate().map(|(i, _)| vec![i as f64]).collect(),
            targets.to_vec(),
            Some(Dimension::Valence),
        )
        .unwrap()
    }

    #[test]
    fn zero_filter_keeps_order() {
        let out = filter_zero_targets(&set(&[0.0, 0.5, -0.2, 0.0])).unwrap();
        assert_eq!(out.targets(), &[0.5, -0.2]);
        assert_eq!(out.rows(), &[vec![1.0], vec![2.0]]);
        assert_eq!(filter_zero_targets(&out).unwrap(), out);
    }

    #[test]
    fn zero_filter_identity_and_empty() {
        let s = set(&[0.1, 0.2]);
        assert_eq!(filter_zero_targets(&s).unwrap(), s);
        assert!(matches!(
            filter_zero_targets(&set(&[0.0, 0.0])),
            Err(Error::EmptyTrainingSet)
        ));
    }

    #[test]
    fn negative_zero_is_zero() {
        let out = filter_zero_targets(&set(&[-0.0, 0.3])).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn construction_checks() {
        assert!(TrainingSet::new(vec!["a".into()], vec![vec![1.0, 2.0]], vec![0.0], None).is_err());
        assert!(TrainingSet::new(vec!["a".into()], vec![vec![1.0]], vec![], None).is_err());
        assert!(TrainingSet::new(vec!["a".into()], vec![vec![1.0]], vec![f64::NAN], None).is_err());
    }

    #[test]
    fn config_defaults() {
        assert_eq!(SvrConfig::for_dimension(Dimension::Valence).complexity_c, 0.0325);
        assert_eq!(SvrConfig::for_dimension(Dimension::Arousal).complexity_c, 0.091);
        assert!(SvrConfig {
            complexity_c: 0.0,
            ..SvrConfig::default()
        }
        .validate()
        .is_err());
    }
}
