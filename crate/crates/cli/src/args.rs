use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gazecast::features::PsdMode;
use gazecast::windowing::{DEFAULT_HOP_S, DEFAULT_WINDOW_S};
use gazecast::{Dimension, Error, FeatureConfig, Result, SvrConfig};

/// Continuous arousal/valence prediction from eye-gaze recordings.
///
/// Log verbosity is read from GAZECAST_LOG (error, warn, info, debug,
/// trace; default info). Logs go to stderr, results to files or stdout.
#[derive(Debug, Parser)]
#[command(name = "gazecast", version, propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cut a gaze CSV into windows and write one feature row per window.
    Extract(ExtractArgs),
    /// Train a linear SVR from feature CSVs and annotation tracks.
    Train(TrainArgs),
    /// Apply a model to a feature CSV.
    Predict(PredictArgs),
    /// Score predictions against an annotation track (Pearson CC).
    Evaluate(EvaluateArgs),
    /// Rank features by signed correlation with the target.
    Rank(RankArgs),
    /// Greedy forward wrapper selection scored by k-fold CV.
    Select(SelectArgs),
    /// Write a deterministic synthetic gaze recording.
    Synth(SynthArgs),
    /// Extract, train and evaluate over a train/test manifest.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// Window length in seconds.
    #[arg(long, default_value_t = DEFAULT_WINDOW_S)]
    pub window_sec: f64,
    /// Hop between window starts in seconds.
    #[arg(long, default_value_t = DEFAULT_HOP_S)]
    pub hop_sec: f64,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            message: format!("must be positive, got {v}"),
        })
    }
}

impl WindowArgs {
    pub fn validate(&self) -> Result<()> {
        positive("window-sec", self.window_sec)?;
        positive("hop-sec", self.hop_sec)
    }
}

#[derive(Debug, Clone, Args)]
pub struct FeatureArgs {
    /// Gaze speed (screen units per second) above which a step counts as scanning.
    #[arg(long, default_value_t = 0.5)]
    pub velocity_threshold: f64,
    /// Fixation zones form an N x N grid over [-1, 1] x [-1, 1].
    #[arg(long, default_value_t = 3)]
    pub zone_grid: usize,
    /// Band edges in Hz, or in cycles per frame (scaled by the frame rate).
    #[arg(long, default_value = "hz", value_parser = parse_psd_mode)]
    pub psd_mode: PsdMode,
    /// Minimum per-frame distance drop in mm for an approach step.
    #[arg(long, default_value_t = 0.0)]
    pub approach_delta_mm: f64,
    /// Eyelid aperture at or below which a frame is closed (aperture inputs only).
    #[arg(long, default_value_t = 0.15)]
    pub closure_threshold: f64,
}

impl FeatureArgs {
    pub fn resolve(&self) -> Result<FeatureConfig> {
        let cfg = FeatureConfig {
            velocity_threshold: self.velocity_threshold,
            approach_delta_mm: self.approach_delta_mm,
            zone_grid: self.zone_grid,
            psd_mode: self.psd_mode,
            ..FeatureConfig::default()
        };
        cfg.validate()?;
        if !(0.0..=1.0).contains(&self.closure_threshold) {
            return Err(Error::InvalidParameter {
                name: "closure-threshold",
                message: format!("must lie in [0, 1], got {}", self.closure_threshold),
            });
        }
        Ok(cfg)
    }
}

fn parse_psd_mode(s: &str) -> std::result::Result<PsdMode, String> {
    s.parse::<PsdMode>().map_err(|e| e.to_string())
}

fn parse_dimension(s: &str) -> std::result::Result<Dimension, String> {
    s.parse::<Dimension>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct TargetArgs {
    /// Affect dimension of the annotation tracks.
    #[arg(long, value_parser = parse_dimension)]
    pub dimension: Dimension,
    /// Drop rows whose target is exactly 0.0 before training
    /// [default: true for valence, false for arousal].
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub drop_zero_target: Option<bool>,
}

impl TargetArgs {
    pub fn drop_zero(&self) -> bool {
        self.drop_zero_target
            .unwrap_or_else(|| self.dimension.drops_zero_targets_by_default())
    }
}

#[derive(Debug, Clone, Args)]
pub struct SvrArgs {
    /// SVR box constraint C [default: 0.091 arousal, 0.0325 valence].
    #[arg(long)]
    pub complexity: Option<f64>,
    /// Half-width of the epsilon-insensitive tube (standardized target units).
    #[arg(long, default_value_t = 0.001)]
    pub epsilon: f64,
    /// Solver stopping tolerance on the KKT gap.
    #[arg(long, default_value_t = 0.001)]
    pub tolerance: f64,
    /// Solver iteration cap.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iterations: usize,
}

impl SvrArgs {
    pub fn resolve(&self, dimension: Dimension, seed: u64) -> Result<SvrConfig> {
        let cfg = SvrConfig {
            complexity_c: self.complexity.unwrap_or_else(|| dimension.default_complexity()),
            epsilon: self.epsilon,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            seed,
        };
        cfg.validate()?;
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "max-iterations",
                message: "must be at least 1".into(),
            });
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CvArgs {
    /// Cross-validation folds.
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Seed for fold assignment and solver scan order.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl CvArgs {
    /// Checks the fold count and every grid value.
    pub fn validate(&self, grid_c: &[f64]) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidParameter {
                name: "folds",
                message: format!("need at least 2, got {}", self.folds),
            });
        }
        grid_c.iter().try_for_each(|&c| positive("grid-c", c))
    }
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Gaze CSV.
    pub gaze: PathBuf,
    /// Output feature CSV [default: stdout].
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Args)]
pub struct LabeledInputs {
    /// Feature CSV; repeat and pair with --annotations in order.
    #[arg(long, required = true)]
    pub features: Vec<PathBuf>,
    /// Annotation CSV (timestamp_ms,value) for the matching --features.
    #[arg(long, required = true)]
    pub annotations: Vec<PathBuf>,
    #[command(flatten)]
    pub target: TargetArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub inputs: LabeledInputs,
    #[command(flatten)]
    pub svr: SvrArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    /// Comma-separated C values; the best by k-fold CV is used.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub grid_c: Vec<f64>,
    /// Model file to write.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Feature CSV.
    #[arg(long)]
    pub features: PathBuf,
    /// Output predictions CSV [default: stdout].
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predictions CSV written by `predict`.
    #[arg(long)]
    pub predictions: PathBuf,
    /// Annotation CSV.
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long, value_parser = parse_dimension)]
    pub dimension: Dimension,
    /// Also write the numbers as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub inputs: LabeledInputs,
    /// Also write the ranking as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub inputs: LabeledInputs,
    #[command(flatten)]
    pub svr: SvrArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    /// Minimum CV gain for accepting a feature.
    #[arg(long, default_value_t = 1e-4)]
    pub min_improvement: f64,
    /// Also write the selection steps as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON synthesis spec; built-in defaults when absent.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Override the spec's duration (seconds).
    #[arg(long)]
    pub duration_sec: Option<f64>,
    /// Override the spec's frame rate (Hz).
    #[arg(long)]
    pub rate_hz: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output gaze CSV [default: stdout].
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// CSV with columns split,gaze,annotations; split is train or test and
    /// paths are relative to the manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub svr: SvrArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    /// Comma-separated C values; the best by k-fold CV is used.
    pub grid_c: Vec<f64>,
    /// Directory for model.gsvr, predictions.csv, report.txt and report.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}
