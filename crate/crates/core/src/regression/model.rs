//! Fitted model and its text file format.
//!
//! ```text
//! GAZESVR1
//! dimension valence
//! complexity 3.2500000000000001e-2
//! epsilon 1.0000000000000000e-3
//! features 31
//! approach_ratio <mean> <std> <weight>
//! ...
//! target <mean> <std>
//! bias <bias>
//! ```
//!
//! Numbers carry 17 significant digits, so a written model reads back
//! bit-identical. `dimension` is `none` for models trained without one.

use std::io::{BufRead, Write};

use super::standardize::Standardization;
use super::{SvrConfig, TrainingSet};
use crate::error::{Error, Result};
use crate::ingest::Dimension;

pub const MODEL_MAGIC: &str = "GAZESVR1";

#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    feature_names: Vec<String>,
    /// Weights on raw (unstandardized) features.
    weights: Vec<f64>,
    bias: f64,
    feature_means: Vec<f64>,
    feature_stds: Vec<f64>,
    target_mean: f64,
    target_std: f64,
    dimension: Option<Dimension>,
    config: SvrConfig,
}

impl SvrModel {
    /// Maps a standardized-space solution `(w, b)` back to raw units.
    pub(super) fn from_standardized(
        data: &TrainingSet,
        params: &Standardization,
        w: &[f64],
        b: f64,
        config: SvrConfig,
    ) -> Self {
        let weights: Vec<f64> = w
            .iter()
            .zip(&params.feature_stds)
            .map(|(w, s)| params.target_std * w / s)
            .collect();
        let offset: f64 = w
            .iter()
            .zip(params.feature_means.iter().zip(&params.feature_stds))
            .map(|(w, (m, s))| w * m / s)
            .sum();
        Self {
            feature_names: data.feature_names().to_vec(),
            weights,
            bias: params.target_mean + params.target_std * (b - offset),
            feature_means: params.feature_means.clone(),
            feature_stds: params.feature_stds.clone(),
            target_mean: params.target_mean,
            target_std: params.target_std,
            dimension: data.dimension(),
            config,
        }
    }

    /// A model with explicit raw-unit weights and bias; standardization
    /// parameters are set to the identity.
    pub fn from_parts(feature_names: Vec<String>, weights: Vec<f64>, bias: f64, config: SvrConfig) -> Result<Self> {
        if feature_names.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: feature_names.len(),
                got: weights.len(),
            });
        }
        let d = weights.len();
        Ok(Self {
            feature_names,
            weights,
            bias,
            feature_means: vec![0.0; d],
            feature_stds: vec![1.0; d],
            target_mean: 0.0,
            target_std: 1.0,
            dimension: None,
            config,
        })
    }

    /// `w . x + b` in raw target units; not clamped to [-1, 1].
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(self.weights.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + self.bias)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn feature_means(&self) -> &[f64] {
        &self.feature_means
    }

    pub fn feature_stds(&self) -> &[f64] {
        &self.feature_stds
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn target_std(&self) -> f64 {
        self.target_std
    }

    pub fn dimension(&self) -> Option<Dimension> {
        self.dimension
    }

    pub fn config(&self) -> &SvrConfig {
        &self.config
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_model<W: Write>(model: &SvrModel, mut out: W) -> Result<()> {
    writeln!(out, "{MODEL_MAGIC}")?;
    writeln!(out, "dimension {}", model.dimension.map_or("none", |d| d.as_str()))?;
    writeln!(out, "complexity {}", num(model.config.complexity_c))?;
    writeln!(out, "epsilon {}", num(model.config.epsilon))?;
    writeln!(out, "features {}", model.weights.len())?;
    for j in 0..model.weights.len() {
        writeln!(
            out,
            "{} {} {} {}",
            model.feature_names[j],
            num(model.feature_means[j]),
            num(model.feature_stds[j]),
            num(model.weights[j])
        )?;
    }
    writeln!(out, "target {} {}", num(model.target_mean), num(model.target_std))?;
    writeln!(out, "bias {}", num(model.bias))?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_fields(&mut self, expect_key: Option<&str>, count: usize) -> Result<Vec<String>> {
        let text = match self.inner.next() {
            Some(l) => l?,
            None => {
                return Err(Error::ModelFormat {
                    line: self.line + 1,
                    message: "unexpected end of file".into(),
                })
            }
        };
        self.line += 1;
        let fields: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        if fields.len() != count {
            return Err(self.err(format!("expected {count} fields, found {}", fields.len())));
        }
        if let Some(key) = expect_key {
            if fields[0] != key {
                return Err(self.err(format!("expected `{key}`, found `{}`", fields[0])));
            }
        }
        Ok(fields)
    }

    fn err(&self, message: String) -> Error {
        Error::ModelFormat {
            line: self.line,
            message,
        }
    }

    fn float(&self, s: &str) -> Result<f64> {
        let v: f64 = s.parse().map_err(|_| self.err(format!("bad number `{s}`")))?;
        if !v.is_finite() {
            return Err(self.err(format!("non-finite number `{s}`")));
        }
        Ok(v)
    }
}

pub fn read_model<R: BufRead>(input: R) -> Result<SvrModel> {
    let mut lines = Lines {
        inner: input.lines(),
        line: 0,
    };
    let magic = lines.next_fields(None, 1)?;
    if magic[0] != MODEL_MAGIC {
        return Err(lines.err(format!("bad magic `{}`", magic[0])));
    }
    let dim = lines.next_fields(Some("dimension"), 2)?;
    let dimension = match dim[1].as_str() {
        "none" => None,
        other => Some(
            other
                .parse::<Dimension>()
                .map_err(|_| lines.err(format!("bad dimension `{other}`")))?,
        ),
    };
    let c = lines.next_fields(Some("complexity"), 2)?;
    let complexity_c = lines.float(&c[1])?;
    let e = lines.next_fields(Some("epsilon"), 2)?;
    let epsilon = lines.float(&e[1])?;
    let f = lines.next_fields(Some("features"), 2)?;
    let d: usize = f[1]
        .parse()
        .map_err(|_| lines.err(format!("bad feature count `{}`", f[1])))?;

    let mut feature_names = Vec::with_capacity(d);
    let mut feature_means = Vec::with_capacity(d);
    let mut feature_stds = Vec::with_capacity(d);
    let mut weights = Vec::with_capacity(d);
    for _ in 0..d {
        let fields = lines.next_fields(None, 4)?;
        feature_names.push(fields[0].clone());
        feature_means.push(lines.float(&fields[1])?);
        let s = lines.float(&fields[2])?;
        if s < 0.0 {
            return Err(lines.err("negative feature std".into()));
        }
        feature_stds.push(s);
        weights.push(lines.float(&fields[3])?);
    }
    let t = lines.next_fields(Some("target"), 3)?;
    let target_mean = lines.float(&t[1])?;
    let target_std = lines.float(&t[2])?;
    let b = lines.next_fields(Some("bias"), 2)?;
    let bias = lines.float(&b[1])?;

    Ok(SvrModel {
        feature_names,
        weights,
        bias,
        feature_means,
        feature_stds,
        target_mean,
        target_std,
        dimension,
        config: SvrConfig {
            complexity_c,
            epsilon,
            ..SvrConfig::default()
        },
    })
}
