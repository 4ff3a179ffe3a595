//! Heart-disease classification: dataset loading, Euclidean KNN, rank-weighted
//! KNN and a sine-cosine search over the rank weights.
//!
//! Everything numeric is generic over [`Scalar`] so the same code runs in
//! `f32` or `f64`.

mod bench;
mod dataset;
mod knn;
mod metrics;
mod sca;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use thiserror::Error;

pub use bench::{
    benchmark, k_sweep, write_bench_csv, write_sweep_csv, write_trace_csv, BenchReport, BenchRow, Knn, ScaWknnModel,
    Wknn, BENCH_COLUMNS, DEFAULT_K, K_SWEEP, REFERENCE_FIGURES, TRAIN_RATIO,
};
pub use dataset::{load_dataset, read_dataset, split, stratified_indices, Dataset, MinMaxScaler, MISSING_MARKER};
pub use knn::{euclidean, knn_neighbors, knn_predict, wknn_predict, Neighbor, NeighborSet};
pub use metrics::{evaluate, Classifier, Confusion, Degenerate, MetricsReport};
pub use sca::{
    sca_optimize, sca_optimize_on, sca_schedule, sca_update, sca_wknn_predict, Agent, FitnessFold, ScaConfig,
    ScaOutcome, UpdateParams, VALIDATION_FRACTION,
};

/// Floating-point type the classifier computes in.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PredictionError {
    #[error("line {line}{}: {reason}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Format { line: usize, column: Option<usize>, reason: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dim { expected: usize, found: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}
