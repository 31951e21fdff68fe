use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gazecast::evaluation::{
    cv_score, evaluate_values, kfold_split, rank_by_correlation, wrapper_greedy_stepwise, WrapperConfig,
};
use gazecast::features::extract_all;
use gazecast::ingest::{
    parse_annotation_csv, parse_gaze_csv, synthesize_sequence, validate_sequence, write_gaze_csv, IngestConfig,
    SynthesisSpec,
};
use gazecast::regression::{filter_zero_targets, read_model, svr_fit, write_model};
use gazecast::windowing::{align_spans, segment};
use gazecast::{
    AnnotationTrack, Dimension, Error, FeatureConfig, GazeSequence, Result, SvrConfig, SvrModel, TrainingSet,
};
use log::{info, warn};
use rayon::prelude::*;

use crate::args::*;
use crate::table::{emit, open, read_table, write_atomic, Table};

fn load_gaze(path: &Path, closure_threshold: f64) -> Result<GazeSequence> {
    let id = path
        .file_stem()
        .map_or_else(|| "gaze".into(), |s| s.to_string_lossy().into_owned());
    parse_gaze_csv(open(path)?, &id, &IngestConfig { closure_threshold })
}

fn load_track(path: &Path, dimension: Dimension) -> Result<AnnotationTrack> {
    parse_annotation_csv(open(path)?, dimension)
}

fn feature_table(seq: &GazeSequence, window: &WindowArgs, cfg: &FeatureConfig) -> Result<Table> {
    let report = validate_sequence(seq, window.hop_sec * 1000.0);
    log::debug!("{}: {report}", seq.source_id());
    if report.non_finite_count > 0 {
        return Err(Error::NonFinite {
            what: format!("{} ({} gaze cells)", seq.source_id(), report.non_finite_count),
        });
    }
    if !report.usable {
        warn!(
            "{}: max frame gap {:.1} ms exceeds twice the hop",
            seq.source_id(),
            report.max_gap_ms
        );
    }
    let windows = segment(seq, window.window_sec, window.hop_sec)?;
    let vectors = extract_all(&windows, cfg)?;
    info!(
        "{}: {} windows from {} frames",
        seq.source_id(),
        windows.len(),
        seq.len()
    );
    Ok(Table::from_features(
        windows.iter().map(|w| w.span()).collect(),
        &vectors,
    ))
}

pub fn extract(args: &ExtractArgs) -> Result<()> {
    args.window.validate()?;
    let cfg = args.features.resolve()?;
    let seq = load_gaze(&args.gaze, args.features.closure_threshold)?;
    let table = feature_table(&seq, &args.window, &cfg)?;
    emit(args.output.as_deref(), table.to_csv().as_bytes())?;
    Ok(())
}

/// Stacks feature tables with their aligned targets. Column order follows
/// the first table.
fn stack(parts: &[(Table, Vec<f64>)], dimension: Dimension) -> Result<TrainingSet> {
    let names = parts[0].0.columns.clone();
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (table, t) in parts {
        rows.extend(table.project(&names)?);
        targets.extend_from_slice(t);
    }
    TrainingSet::new(names, rows, targets, Some(dimension))
}

fn maybe_drop_zero(data: TrainingSet, target: &TargetArgs) -> Result<TrainingSet> {
    if !target.drop_zero() {
        return Ok(data);
    }
    let n = data.len();
    let kept = filter_zero_targets(&data)?;
    info!(
        "dropped {} zero-valued {} targets; training on {} of {} rows",
        n - kept.len(),
        target.dimension,
        kept.len(),
        n
    );
    Ok(kept)
}

fn load_labeled(inputs: &LabeledInputs) -> Result<TrainingSet> {
    if inputs.features.len() != inputs.annotations.len() {
        return Err(Error::InvalidParameter {
            name: "annotations",
            message: format!(
                "{} --features but {} --annotations",
                inputs.features.len(),
                inputs.annotations.len()
            ),
        });
    }
    let dim = inputs.target.dimension;
    let parts = inputs
        .features
        .iter()
        .zip(&inputs.annotations)
        .map(|(f, a)| {
            let table = read_table(f)?;
            let targets = align_spans(&table.spans, &load_track(a, dim)?)?;
            Ok((table, targets))
        })
        .collect::<Result<Vec<_>>>()?;
    maybe_drop_zero(stack(&parts, dim)?, &inputs.target)
}

/// Fits on all columns. With a non-empty grid, C is the grid value with the
/// best mean CV correlation (first on ties).
fn fit_model(data: &TrainingSet, mut svr: SvrConfig, grid: &[f64], cv: &CvArgs) -> Result<SvrModel> {
    if !grid.is_empty() {
        let folds = kfold_split(data.len(), cv.folds, cv.seed)?;
        let all: Vec<usize> = (0..data.n_features()).collect();
        let scores = grid
            .par_iter()
            .map(|&c| {
                let trial = SvrConfig { complexity_c: c, ..svr };
                cv_score(data, &all, &trial, &folds)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut best = 0;
        for (i, (c, s)) in grid.iter().zip(&scores).enumerate() {
            info!(
                "C = {c}: {}-fold CV CC {:.5} ({} degenerate folds)",
                cv.folds, s.mean, s.degenerate_folds
            );
            if s.mean > scores[best].mean {
                best = i;
            }
        }
        svr.complexity_c = grid[best];
        info!("selected C = {}", svr.complexity_c);
    }
    info!(
        "fitting SVR on {} rows x {} features (C = {}, epsilon = {})",
        data.len(),
        data.n_features(),
        svr.complexity_c,
        svr.epsilon
    );
    svr_fit(data, &svr)
}

fn model_bytes(model: &SvrModel) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_model(model, &mut buf)?;
    Ok(buf)
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let svr = args.svr.resolve(args.inputs.target.dimension, args.cv.seed)?;
    args.cv.validate(&args.grid_c)?;
    let data = load_labeled(&args.inputs)?;
    let model = fit_model(&data, svr, &args.grid_c, &args.cv)?;
    write_atomic(&args.output, &model_bytes(&model)?)?;
    info!("wrote {}", args.output.display());
    Ok(())
}

fn predictions(model: &SvrModel, table: &Table) -> Result<Vec<f64>> {
    table
        .project(model.feature_names())?
        .iter()
        .map(|r| model.predict(r))
        .collect()
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let model = read_model(open(&args.model)?)?;
    let table = read_table(&args.features)?;
    let pred = predictions(&model, &table)?;
    let out = Table {
        columns: vec!["prediction".into()],
        spans: table.spans.clone(),
        rows: pred.into_iter().map(|p| vec![p]).collect(),
    };
    emit(args.output.as_deref(), out.to_csv().as_bytes())?;
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let table = read_table(&args.predictions)?;
    let col = table.column_index("prediction").ok_or_else(|| Error::MissingColumn {
        column: "prediction".into(),
    })?;
    let pred: Vec<f64> = table.rows.iter().map(|r| r[col]).collect();
    let gold = align_spans(&table.spans, &load_track(&args.annotations, args.dimension)?)?;
    let report = evaluate_values(&pred, &gold, Some(args.dimension))?;
    emit(None, report.to_string().as_bytes())?;
    if let Some(path) = &args.csv {
        write_atomic(path, report.to_csv().as_bytes())?;
    }
    Ok(())
}

pub fn rank(args: &RankArgs) -> Result<()> {
    let data = load_labeled(&args.inputs)?;
    let report = rank_by_correlation(&data)?;
    emit(None, report.to_string().as_bytes())?;
    if let Some(path) = &args.csv {
        write_atomic(path, report.to_csv().as_bytes())?;
    }
    Ok(())
}

pub fn select(args: &SelectArgs) -> Result<()> {
    let svr = args.svr.resolve(args.inputs.target.dimension, args.cv.seed)?;
    args.cv.validate(&[])?;
    let data = load_labeled(&args.inputs)?;
    let cfg = WrapperConfig {
        folds: args.cv.folds,
        seed: args.cv.seed,
        min_improvement: args.min_improvement,
        ..WrapperConfig::default()
    };
    let report = wrapper_greedy_stepwise(&data, &svr, &cfg)?;
    emit(None, report.to_string().as_bytes())?;
    if let Some(path) = &args.csv {
        write_atomic(path, report.to_csv().as_bytes())?;
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(path) => serde_json::from_reader(open(path)?).map_err(|e| Error::MalformedRecord {
            row: e.line(),
            message: e.to_string(),
        })?,
        None => SynthesisSpec::default(),
    };
    if let Some(d) = args.duration_sec {
        spec.duration_s = d;
    }
    if let Some(r) = args.rate_hz {
        spec.rate_hz = r;
    }
    let seq = synthesize_sequence(&spec, args.seed)?;
    let mut buf = Vec::new();
    write_gaze_csv(&seq, &mut buf)?;
    emit(args.output.as_deref(), &buf)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Split {
    Train,
    Test,
}

#[derive(Debug)]
struct ManifestEntry {
    split: Split,
    gaze: PathBuf,
    annotations: PathBuf,
}

fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let headers = reader.headers().map_err(|e| manifest_error(0, e))?.clone();
    let idx = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn { column: name.into() })
    };
    let (s, g, a) = (idx("split")?, idx("gaze")?, idx("annotations")?);
    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| manifest_error(row, e))?;
        let split = match &record[s] {
            "train" => Split::Train,
            "test" => Split::Test,
            other => {
                return Err(Error::MalformedRecord {
                    row,
                    message: format!("split must be `train` or `test`, got `{other}`"),
                })
            }
        };
        entries.push(ManifestEntry {
            split,
            gaze: base.join(&record[g]),
            annotations: base.join(&record[a]),
        });
    }
    for split in [Split::Train, Split::Test] {
        if !entries.iter().any(|e| e.split == split) {
            return Err(Error::Empty {
                what: if split == Split::Train {
                    "train split"
                } else {
                    "test split"
                },
            });
        }
    }
    Ok(entries)
}

fn manifest_error(row: usize, err: csv::Error) -> Error {
    if err.is_io_error() {
        if let csv::ErrorKind::Io(io) = err.into_kind() {
            return Error::Io(io);
        }
        unreachable!()
    }
    Error::MalformedRecord {
        row,
        message: err.to_string(),
    }
}

pub fn pipeline(args: &PipelineArgs) -> Result<()> {
    args.window.validate()?;
    let features = args.features.resolve()?;
    let svr = args.svr.resolve(args.target.dimension, args.cv.seed)?;
    args.cv.validate(&args.grid_c)?;
    let entries = read_manifest(&args.manifest)?;
    let dim = args.target.dimension;
    let parts = entries
        .par_iter()
        .map(|e| {
            let seq = load_gaze(&e.gaze, args.features.closure_threshold)?;
            let table = feature_table(&seq, &args.window, &features)?;
            let targets = align_spans(&table.spans, &load_track(&e.annotations, dim)?)?;
            Ok((seq.source_id().to_string(), table, targets))
        })
        .collect::<Result<Vec<_>>>()?;

    let pick = |split: Split| -> Vec<(Table, Vec<f64>)> {
        entries
            .iter()
            .zip(&parts)
            .filter(|(e, _)| e.split == split)
            .map(|(_, (_, t, y))| (t.clone(), y.clone()))
            .collect()
    };
    let train_set = maybe_drop_zero(stack(&pick(Split::Train), dim)?, &args.target)?;
    let model = fit_model(&train_set, svr, &args.grid_c, &args.cv)?;

    let mut csv = String::from("source,window_start_ms,window_end_ms,prediction,target\n");
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    for (e, (source, table, targets)) in entries.iter().zip(&parts) {
        if e.split != Split::Test {
            continue;
        }
        let p = predictions(&model, table)?;
        for (((s, end), p), y) in table.spans.iter().zip(&p).zip(targets) {
            let _ = writeln!(csv, "{source},{s},{end},{p},{y}");
        }
        pred.extend(p);
        gold.extend_from_slice(targets);
    }
    let report = evaluate_values(&pred, &gold, Some(dim))?;

    fs::create_dir_all(&args.out_dir)?;
    write_atomic(&args.out_dir.join("model.gsvr"), &model_bytes(&model)?)?;
    write_atomic(&args.out_dir.join("predictions.csv"), csv.as_bytes())?;
    write_atomic(&args.out_dir.join("report.txt"), report.to_string().as_bytes())?;
    write_atomic(&args.out_dir.join("report.csv"), report.to_csv().as_bytes())?;
    info!("wrote results to {}", args.out_dir.display());
    emit(None, report.to_string().as_bytes())?;
    Ok(())
}
