//! Pearson scoring, correlation ranking and wrapper feature selection.

use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{extract, FeatureConfig};
use crate::ingest::Dimension;
use crate::regression::{svr_fit, SvrConfig, SvrModel, TrainingSet};
use crate::windowing::LabeledWindow;

/// Score assigned to a CV fold whose correlation is undefined.
pub const WORST_SCORE: f64 = -1.0;

/// Pearson product-moment correlation.
pub fn pearson_cc(pred: &[f64], gold: &[f64]) -> Result<f64> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: gold.len(),
        });
    }
    if pred.len() < 2 {
        return Err(Error::TooFewSamples {
            what: "correlation",
            needed: 2,
            got: pred.len(),
        });
    }
    let n = pred.len() as f64;
    let mp = pred.iter().sum::<f64>() / n;
    let mg = gold.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (p, g) in pred.iter().zip(gold) {
        let (dp, dg) = (p - mp, g - mg);
        sxy += dp * dg;
        sxx += dp * dp;
        syy += dg * dg;
    }
    let constant = |v: &[f64]| v.iter().all(|x| *x == v[0]);
    if !(sxx > 0.0) || constant(pred) {
        return Err(Error::ZeroVariance { what: "predictions" });
    }
    if !(syy > 0.0) || constant(gold) {
        return Err(Error::ZeroVariance { what: "gold values" });
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Seeded shuffle of `0..n` cut into `k` contiguous folds whose sizes
/// differ by at most one (the first `n % k` folds get the extra index).
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidParameter {
            name: "folds",
            message: format!("need at least 2 folds, got {k}"),
        });
    }
    if k > n {
        return Err(Error::InvalidParameter {
            name: "folds",
            message: format!("{k} folds exceed {n} rows"),
        });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(idx[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankEntry {
    pub name: String,
    /// Column index in the evaluated training set.
    pub index: usize,
    pub correlation: f64,
}

/// Per-feature correlation with the target, strongest positive first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    pub dimension: Option<Dimension>,
    pub entries: Vec<RankEntry>,
}

impl RankingReport {
    /// Entries ordered by |CC| descending, ties by column index.
    pub fn by_magnitude(&self) -> Vec<RankEntry> {
        let mut e = self.entries.clone();
        e.sort_by(|a, b| {
            b.correlation
                .abs()
                .total_cmp(&a.correlation.abs())
                .then(a.index.cmp(&b.index))
        });
        e
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,feature,correlation,abs_rank\n");
        let magnitude = self.by_magnitude();
        for (r, e) in self.entries.iter().enumerate() {
            let abs_rank = magnitude.iter().position(|m| m.index == e.index).unwrap_or(0) + 1;
            let _ = writeln!(out, "{},{},{},{}", r + 1, e.name, e.correlation, abs_rank);
        }
        out
    }
}

impl fmt::Display for RankingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dim = self.dimension.map_or("target", |d| d.as_str());
        writeln!(f, "Feature correlation ranking ({dim})")?;
        writeln!(
            f,
            "{:>4}  {:<24} {:>10}   {:<24} {:>10}",
            "rank", "signed", "CC", "by |CC|", "CC"
        )?;
        for (r, (s, m)) in self.entries.iter().zip(self.by_magnitude()).enumerate() {
            writeln!(
                f,
                "{:>4}  {:<24} {:>10.5}   {:<24} {:>10.5}",
                r + 1,
                s.name,
                s.correlation,
                m.name,
                m.correlation
            )?;
        }
        Ok(())
    }
}

/// Ranks every feature by its signed Pearson correlation with the target.
///
/// Zero-variance features score 0; ties keep column order.
pub fn rank_by_correlation(data: &TrainingSet) -> Result<RankingReport> {
    if data.len() < 3 {
        return Err(Error::TooFewSamples {
            what: "correlation ranking",
            needed: 3,
            got: data.len(),
        });
    }
    let targets = data.targets();
    if targets.iter().all(|t| *t == targets[0]) {
        return Err(Error::ZeroVariance { what: "target" });
    }
    let mut entries: Vec<RankEntry> = (0..data.n_features())
        .map(|j| {
            let correlation = match pearson_cc(&data.column(j), targets) {
                Ok(cc) => cc,
                Err(Error::ZeroVariance { what: "predictions" }) => 0.0,
                Err(e) => return Err(e),
            };
            Ok(RankEntry {
                name: data.feature_names()[j].clone(),
                index: j,
                correlation,
            })
        })
        .collect::<Result<_>>()?;
    entries.sort_by(|a, b| b.correlation.total_cmp(&a.correlation).then(a.index.cmp(&b.index)));
    Ok(RankingReport {
        dimension: data.dimension(),
        entries,
    })
}

/// Cross-validated score of one feature subset.
#[derive(Debug, Clone, PartialEq)]
pub struct CvScore {
    /// Unweighted mean of the per-fold scores.
    pub mean: f64,
    pub per_fold: Vec<f64>,
    /// Folds whose correlation was undefined and scored [`WORST_SCORE`].
    pub degenerate_folds: usize,
}

/// k-fold CV of an SVR on the given columns, scored by per-fold Pearson CC.
pub fn cv_score(data: &TrainingSet, columns: &[usize], svr: &SvrConfig, folds: &[Vec<usize>]) -> Result<CvScore> {
    let subset = data.select_columns(columns);
    let mut per_fold = Vec::with_capacity(folds.len());
    let mut degenerate_folds = 0;
    for (f, held_out) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        let model = svr_fit(&subset.select_rows(&train_idx), svr)?;
        let pred: Vec<f64> = held_out
            .iter()
            .map(|&i| model.predict(&subset.rows()[i]))
            .collect::<Result<_>>()?;
        let gold: Vec<f64> = held_out.iter().map(|&i| subset.targets()[i]).collect();
        match pearson_cc(&pred, &gold) {
            Ok(cc) => per_fold.push(cc),
            Err(Error::ZeroVariance { .. } | Error::TooFewSamples { .. }) => {
                degenerate_folds += 1;
                per_fold.push(WORST_SCORE);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(CvScore {
        mean: per_fold.iter().sum::<f64>() / per_fold.len() as f64,
        per_fold,
        degenerate_folds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrapperConfig {
    pub folds: usize,
    pub seed: u64,
    /// A candidate is accepted only if it beats the current score by more
    /// than this.
    pub min_improvement: f64,
    /// Merit of the empty subset. A constant predictor carries no
    /// correlation, so this is 0.
    pub baseline_score: f64,
}

impl Default for WrapperConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            seed: 0,
            min_improvement: 1e-4,
            baseline_score: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionStep {
    pub name: String,
    pub index: usize,
    /// Mean CV score after adding this feature.
    pub score: f64,
    pub degenerate_folds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub dimension: Option<Dimension>,
    pub baseline_score: f64,
    pub steps: Vec<SelectionStep>,
    /// Best rejected candidate at the stopping step, if any was evaluated.
    pub best_rejected: Option<SelectionStep>,
}

impl SelectionReport {
    pub fn selected_indices(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.index).collect()
    }

    pub fn final_score(&self) -> f64 {
        self.steps.last().map_or(self.baseline_score, |s| s.score)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,feature,cv_score,degenerate_folds\n");
        for (i, s) in self.steps.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", i + 1, s.name, s.score, s.degenerate_folds);
        }
        out
    }
}

impl fmt::Display for SelectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dim = self.dimension.map_or("target", |d| d.as_str());
        writeln!(f, "Wrapper greedy forward selection ({dim})")?;
        writeln!(f, "baseline CV score {:.5}", self.baseline_score)?;
        writeln!(
            f,
            "{:>4}  {:<24} {:>10} {:>10}",
            "rank", "feature", "CV CC", "bad folds"
        )?;
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(
                f,
                "{:>4}  {:<24} {:>10.5} {:>10}",
                i + 1,
                s.name,
                s.score,
                s.degenerate_folds
            )?;
        }
        if let Some(r) = &self.best_rejected {
            writeln!(f, "stopped: best remaining `{}` scored {:.5}", r.name, r.score)?;
        }
        Ok(())
    }
}

/// Greedy forward selection scored by k-fold CV mean Pearson CC.
///
/// Candidates of a step are evaluated in parallel; the winner is the highest
/// score with ties going to the lowest column index, so the result does not
/// depend on scheduling.
pub fn wrapper_greedy_stepwise(data: &TrainingSet, svr: &SvrConfig, config: &WrapperConfig) -> Result<SelectionReport> {
    svr.validate()?;
    if data.len() < config.folds {
        return Err(Error::TooFewSamples {
            what: "wrapper selection",
            needed: config.folds,
            got: data.len(),
        });
    }
    let folds = kfold_split(data.len(), config.folds, config.seed)?;
    let mut selected: Vec<usize> = Vec::new();
    let mut steps: Vec<SelectionStep> = Vec::new();
    let mut current = config.baseline_score;
    let mut best_rejected = None;

    loop {
        let candidates: Vec<usize> = (0..data.n_features()).filter(|j| !selected.contains(j)).collect();
        if candidates.is_empty() {
            break;
        }
        let scores: Vec<CvScore> = candidates
            .par_iter()
            .map(|&j| {
                let mut cols = selected.clone();
                cols.push(j);
                cv_score(data, &cols, svr, &folds)
            })
            .collect::<Result<_>>()?;
        let (best_pos, best) = scores
            .iter()
            .enumerate()
            .fold(None::<(usize, &CvScore)>, |acc, (p, s)| match acc {
                Some((_, b)) if b.mean >= s.mean => acc,
                _ => Some((p, s)),
            })
            .expect("non-empty candidates");
        let j = candidates[best_pos];
        let step = SelectionStep {
            name: data.feature_names()[j].clone(),
            index: j,
            score: best.mean,
            degenerate_folds: best.degenerate_folds,
        };
        if best.mean > current + config.min_improvement {
            log::debug!("accepted `{}` with CV score {:.5}", step.name, step.score);
            current = best.mean;
            selected.push(j);
            steps.push(step);
        } else {
            best_rejected = Some(step);
            break;
        }
    }
    Ok(SelectionReport {
        dimension: data.dimension(),
        baseline_score: config.baseline_score,
        steps,
        best_rejected,
    })
}

/// Correlation summary for one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub dimension: Option<Dimension>,
    pub count: usize,
    /// `None` when the correlation is undefined; see `note`.
    pub correlation: Option<f64>,
    pub note: Option<String>,
    /// `prediction - gold`, per window.
    pub residuals: Vec<f64>,
}

impl EvaluationReport {
    pub fn rmse(&self) -> f64 {
        if self.residuals.is_empty() {
            return 0.0;
        }
        (self.residuals.iter().map(|r| r * r).sum::<f64>() / self.residuals.len() as f64).sqrt()
    }

    pub fn to_csv(&self) -> String {
        format!(
            "dimension,count,correlation,rmse\n{},{},{},{}\n",
            self.dimension.map_or("none", |d| d.as_str()),
            self.count,
            self.correlation.map_or(String::from("NA"), |c| c.to_string()),
            self.rmse()
        )
    }
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dim = self.dimension.map_or("target", |d| d.as_str());
        writeln!(f, "Affect prediction (Pearson CC)")?;
        writeln!(f, "{:<10} {:>10} {:>8} {:>10}", "modality", dim, "n", "rmse")?;
        let cc = self.correlation.map_or(String::from("NA"), |c| format!("{c:.5}"));
        writeln!(
            f,
            "{:<10} {:>10} {:>8} {:>10.5}",
            "eye gaze",
            cc,
            self.count,
            self.rmse()
        )?;
        if let Some(note) = &self.note {
            writeln!(f, "note: {note}")?;
        }
        Ok(())
    }
}

/// Scores predictions against gold values. Undefined correlations are
/// recorded in the report rather than returned as errors.
pub fn evaluate_values(pred: &[f64], gold: &[f64], dimension: Option<Dimension>) -> Result<EvaluationReport> {
    if pred.is_empty() {
        return Err(Error::Empty { what: "evaluation set" });
    }
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: gold.len(),
        });
    }
    let (correlation, note) = match pearson_cc(pred, gold) {
        Ok(cc) => (Some(cc), None),
        Err(e @ (Error::ZeroVariance { .. } | Error::TooFewSamples { .. })) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(EvaluationReport {
        dimension,
        count: pred.len(),
        correlation,
        note,
        residuals: pred.iter().zip(gold).map(|(p, g)| p - g).collect(),
    })
}

/// Extracts features for each labeled window, predicts, and scores.
pub fn evaluate_predictions(
    model: &SvrModel,
    labeled: &[LabeledWindow<'_>],
    config: &FeatureConfig,
) -> Result<EvaluationReport> {
    if labeled.is_empty() {
        return Err(Error::Empty { what: "evaluation set" });
    }
    let pred: Vec<f64> = labeled
        .iter()
        .map(|lw| model.predict(extract(&lw.window, config)?.as_slice()))
        .collect::<Result<_>>()?;
    let gold: Vec<f64> = labeled.iter().map(|lw| lw.target).collect();
    evaluate_values(&pred, &gold, Some(labeled[0].dimension))
}
