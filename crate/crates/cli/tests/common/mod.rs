#![allow(dead_code)]

use std::ffi::OsStr;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gazecast::ingest::{
    synthesize_sequence, write_annotation_csv, write_gaze_csv, BlinkSchedule, Generator, SynthesisSpec,
};
use gazecast::windowing::segment;
use gazecast::{AnnotationTrack, Dimension};
use gazecast_oracle::gaze::{feature_vector, Frame, OracleConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn gazecast<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_gazecast"))
        .args(args)
        .env("GAZECAST_LOG", "info")
        .output()
        .expect("spawn gazecast")
}

/// Runs and panics with stderr unless the exit status is 0.
pub fn ok<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<OsStr>,
{
    let out = gazecast(args);
    assert!(
        out.status.success(),
        "exit {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A recording whose gaze statistics drift from window to window.
pub fn varied_spec(seed: u64, duration_s: f64) -> SynthesisSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    SynthesisSpec {
        source_id: format!("rec{seed}"),
        duration_s,
        rate_hz: 30.0,
        gaze_x: vec![
            Generator::Fixations {
                mean_dwell_s: rng.random_range(0.5..4.0),
                amplitude: rng.random_range(0.3..0.9),
            },
            Generator::Sinusoid {
                frequency_hz: rng.random_range(0.02..0.3),
                amplitude: rng.random_range(0.1..0.4),
                phase_rad: rng.random_range(0.0..6.0),
            },
            Generator::Noise { std_dev: 0.03 },
        ],
        gaze_y: vec![
            Generator::Fixations {
                mean_dwell_s: rng.random_range(0.2..2.0),
                amplitude: rng.random_range(0.2..0.9),
            },
            Generator::Noise { std_dev: 0.05 },
        ],
        distance_mm: vec![
            Generator::Constant { value: 600.0 },
            Generator::Sinusoid {
                frequency_hz: rng.random_range(0.05..0.5),
                amplitude: 20.0,
                phase_rad: 0.0,
            },
            Generator::Noise { std_dev: 1.0 },
        ],
        blinks: BlinkSchedule::Random {
            rate_per_s: 0.3,
            min_frames: 2,
            max_frames: 6,
        },
    }
}

pub struct Corpus {
    pub gaze: Vec<PathBuf>,
    pub annotations: Vec<PathBuf>,
    /// Reference feature vectors per recording and window.
    pub features: Vec<Vec<[f64; 31]>>,
    pub spans: Vec<Vec<(f64, f64)>>,
    pub targets: Vec<Vec<f64>>,
}

/// Writes `files` recordings into `dir` with one annotation point at each
/// window centre. Targets are `raw(features, rng)`, centred and scaled into
/// [-0.95, 0.95] over the whole corpus.
pub fn corpus(
    dir: &Path,
    files: usize,
    duration_s: f64,
    seed: u64,
    dimension: Dimension,
    mut raw: impl FnMut(&[f64; 31], &mut ChaCha8Rng) -> f64,
) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = OracleConfig::default();
    let mut out = Corpus {
        gaze: Vec::new(),
        annotations: Vec::new(),
        features: Vec::new(),
        spans: Vec::new(),
        targets: Vec::new(),
    };
    for i in 0..files {
        let seq = synthesize_sequence(&varied_spec(seed * 1000 + i as u64, duration_s), seed + i as u64).unwrap();
        let gaze = dir.join(format!("rec{i}.csv"));
        let mut buf = Vec::new();
        write_gaze_csv(&seq, &mut buf).unwrap();
        fs::write(&gaze, buf).unwrap();
        let windows = segment(&seq, 3.0, 2.0).unwrap();
        let feats: Vec<[f64; 31]> = windows
            .iter()
            .map(|w| {
                let frames: Vec<Frame> = w
                    .samples
                    .iter()
                    .map(|s| (s.timestamp_ms, s.gaze_x, s.gaze_y, s.screen_distance_mm, s.eye_closed))
                    .collect();
                feature_vector(&frames, w.rate_hz, &cfg)
            })
            .collect();
        out.targets.push(feats.iter().map(|f| raw(f, &mut rng)).collect());
        out.spans.push(windows.iter().map(|w| (w.start_ms, w.end_ms)).collect());
        out.features.push(feats);
        out.gaze.push(gaze);
    }
    let all: Vec<f64> = out.targets.iter().flatten().copied().collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let scale = all.iter().map(|t| (t - mean).abs()).fold(0.0, f64::max) / 0.95;
    for (i, targets) in out.targets.iter_mut().enumerate() {
        for t in targets.iter_mut() {
            *t = if scale > 0.0 { (*t - mean) / scale } else { 0.0 };
        }
        let points = out.spans[i]
            .iter()
            .zip(targets.iter())
            .map(|(s, t)| (s.0 + 1500.0, *t))
            .collect();
        let track = AnnotationTrack::new(dimension, points).unwrap();
        let path = dir.join(format!("rec{i}_{dimension}.csv"));
        let mut buf = Vec::new();
        write_annotation_csv(&track, &mut buf).unwrap();
        fs::write(&path, buf).unwrap();
        out.annotations.push(path);
    }
    out
}

/// Runs `extract` on every recording, returning the feature CSV paths.
pub fn extract_all(dir: &Path, corpus: &Corpus) -> Vec<PathBuf> {
    corpus
        .gaze
        .iter()
        .map(|g| {
            let out = dir.join(format!("{}.features.csv", g.file_stem().unwrap().to_str().unwrap()));
            ok(["extract", p(g), "-o", p(&out)]);
            out
        })
        .collect()
}

/// `--features a --annotations b` pairs for the given recordings.
pub fn labeled_args(features: &[PathBuf], annotations: &[PathBuf], pick: &[usize]) -> Vec<String> {
    pick.iter()
        .flat_map(|&i| {
            [
                "--features".to_string(),
                p(&features[i]).to_string(),
                "--annotations".to_string(),
                p(&annotations[i]).to_string(),
            ]
        })
        .collect()
}
