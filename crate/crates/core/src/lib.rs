//! Continuous affect prediction from eye-gaze time series.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`ingest`] parses frame-wise gaze recordings and affect annotation
//!    tracks (or synthesizes deterministic recordings for testing).
//! 2. [`windowing`] cuts a recording into overlapping 3 s windows moved
//!    forward every 2 s and attaches one affect target to each window.
//! 3. [`features`] turns each window into the fixed 31-slot affective gaze
//!    vector (distance approach, scan paths, per-axis coordinate statistics
//!    and band powers, fixation-zone spread, eye closure).
//! 4. [`regression`] fits a linear epsilon-SVR with an SMO dual solver, and
//!    [`evaluation`] scores it with Pearson's correlation coefficient and
//!    ranks or selects features.
//!
//! ```
//! use gazecast::ingest::{synthesize_sequence, SynthesisSpec};
//! use gazecast::windowing::segment;
//! use gazecast::features::{extract, FeatureConfig, FEATURE_COUNT};
//!
//! let spec = SynthesisSpec { duration_s: 9.0, ..SynthesisSpec::default() };
//! let seq = synthesize_sequence(&spec, 7).unwrap();
//! let windows = segment(&seq, 3.0, 2.0).unwrap();
//! assert_eq!(windows.len(), 4);
//! let v = extract(&windows[0], &FeatureConfig::default()).unwrap();
//! assert_eq!(v.as_slice().len(), FEATURE_COUNT);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evaluation;
pub mod features;
pub mod ingest;
pub mod regression;
pub mod windowing;

pub use error::{Error, ErrorCategory, Result};
pub use features::{feature_names, FeatureConfig, FeatureVector, FEATURE_COUNT};
pub use ingest::{AnnotationTrack, Dimension, GazeSample, GazeSequence};
pub use regression::{SvrConfig, SvrModel, TrainingSet};
pub use windowing::{LabeledWindow, Window};
