use std::io::Write;

use serde::Serialize;

use super::knn::{knn_neighbors, knn_predict, wknn_predict};
use super::metrics::{evaluate, Classifier, MetricsReport};
use super::sca::{sca_optimize, sca_wknn_predict, Agent, ScaConfig};
use super::{split, Dataset, MinMaxScaler, PredictionError, Scalar};

pub const TRAIN_RATIO: f64 = 0.7;
pub const DEFAULT_K: usize = 5;
pub const K_SWEEP: [usize; 4] = [1, 3, 5, 7];

/// Published figures for the three classifiers, shown next to measured
/// numbers for comparison only: (classifier, accuracy %, time ms).
pub const REFERENCE_FIGURES: [(&str, Option<f64>, f64); 3] =
    [("SCA-WKNN", Some(97.1), 2.15), ("WKNN", None, 1.835), ("KNN", None, 1.643)];

pub struct Knn<'a, F> {
    pub train: &'a Dataset<F>,
    pub k: usize,
}

impl<F: Scalar> Classifier<F> for Knn<'_, F> {
    fn name(&self) -> &str {
        "KNN"
    }

    fn predict(&self, query: &[F]) -> Result<u8, PredictionError> {
        Ok(knn_predict(&knn_neighbors(query, self.train, self.k)?))
    }
}

pub struct Wknn<'a, F> {
    pub train: &'a Dataset<F>,
    pub weights: Vec<F>,
}

impl<F: Scalar> Classifier<F> for Wknn<'_, F> {
    fn name(&self) -> &str {
        "WKNN"
    }

    fn predict(&self, query: &[F]) -> Result<u8, PredictionError> {
        wknn_predict(&knn_neighbors(query, self.train, self.weights.len())?, &self.weights)
    }
}

/// A trained SCA-WKNN classifier: scaler fitted on the training rows, the
/// scaled training rows, and the optimized weights. Queries are given in
/// raw units.
#[derive(Debug, Clone)]
pub struct ScaWknnModel<F> {
    pub scaler: MinMaxScaler<F>,
    pub train: Dataset<F>,
    pub best: Agent<F>,
    pub trace: Vec<F>,
}

impl<F: Scalar> ScaWknnModel<F> {
    pub fn fit(raw_train: &Dataset<F>, cfg: &ScaConfig<F>) -> Result<Self, PredictionError> {
        let scaler = MinMaxScaler::fit(raw_train);
        let train = scaler.transform(raw_train);
        let outcome = sca_optimize(&train, cfg)?;
        Ok(Self { scaler, train, best: outcome.best, trace: outcome.trace })
    }

    pub fn k(&self) -> usize {
        self.best.weights.len()
    }
}

impl<F: Scalar> Classifier<F> for ScaWknnModel<F> {
    fn name(&self) -> &str {
        "SCA-WKNN"
    }

    fn predict(&self, query: &[F]) -> Result<u8, PredictionError> {
        sca_wknn_predict(&self.scaler.transform_row(query), &self.train, &self.best, self.k())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub classifier: String,
    pub k: usize,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone)]
pub struct BenchReport<F> {
    pub rows: Vec<BenchRow>,
    pub trace: Vec<F>,
    pub best_weights: Vec<F>,
    pub train_rows: usize,
    pub test_rows: usize,
}

impl<F: Scalar> BenchReport<F> {
    pub fn accuracy_of(&self, classifier: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.classifier == classifier).map(|r| r.metrics.accuracy)
    }
}

/// Splits 70:30, rescales with a scaler fitted on the training part, and
/// scores KNN, equal-weight WKNN and SCA-WKNN on the same test rows.
pub fn benchmark<F: Scalar>(ds: &Dataset<F>, cfg: &ScaConfig<F>) -> Result<BenchReport<F>, PredictionError> {
    let (raw_train, raw_test) = split(ds, TRAIN_RATIO, cfg.seed);
    let model = ScaWknnModel::fit(&raw_train, cfg)?;
    let test = model.scaler.transform(&raw_test);
    let train = &model.train;
    let knn = Knn { train, k: cfg.k };
    let wknn = Wknn { train, weights: vec![F::one(); cfg.k] };
    let sca = Wknn { train, weights: model.best.weights.clone() };
    let mut rows = Vec::with_capacity(3);
    for (name, clf) in [("KNN", &knn as &dyn Classifier<F>), ("WKNN", &wknn), ("SCA-WKNN", &sca)] {
        let (metrics, _) = evaluate(&test, clf)?;
        rows.push(BenchRow { classifier: name.to_string(), k: cfg.k, metrics });
    }
    Ok(BenchReport {
        rows,
        trace: model.trace,
        best_weights: model.best.weights,
        train_rows: raw_train.len(),
        test_rows: raw_test.len(),
    })
}

/// Runs [`benchmark`] once per k in `ks`.
pub fn k_sweep<F: Scalar>(ds: &Dataset<F>, cfg: &ScaConfig<F>, ks: &[usize]) -> Result<Vec<BenchRow>, PredictionError> {
    let mut rows = Vec::new();
    for &k in ks {
        rows.extend(benchmark(ds, &ScaConfig { k, ..*cfg })?.rows);
    }
    Ok(rows)
}

pub const BENCH_COLUMNS: [&str; 7] = ["classifier", "accuracy", "precision", "recall", "f_measure", "rmse", "time_ms"];

fn metric_fields(m: &MetricsReport) -> [String; 6] {
    [
        format!("{:.6}", m.accuracy),
        format!("{:.6}", m.precision),
        format!("{:.6}", m.recall),
        format!("{:.6}", m.f_measure),
        format!("{:.6}", m.rmse),
        format!("{:.4}", m.wall_time_ms),
    ]
}

/// One row per classifier, followed by comment lines with the published
/// reference figures.
pub fn write_bench_csv(rows: &[BenchRow], out: impl Write) -> Result<(), PredictionError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_COLUMNS).map_err(io_err)?;
    for r in rows {
        let mut rec = vec![r.classifier.clone()];
        rec.extend(metric_fields(&r.metrics));
        w.write_record(&rec).map_err(io_err)?;
    }
    let mut out = w.into_inner().map_err(|e| PredictionError::Io(e.to_string()))?;
    for (name, acc, ms) in REFERENCE_FIGURES {
        let acc = acc.map_or_else(|| "n/a".to_string(), |a| format!("{a}%"));
        writeln!(out, "# published reference: {name} accuracy {acc}, time {ms} ms").map_err(io_err)?;
    }
    Ok(())
}

pub fn write_sweep_csv(rows: &[BenchRow], out: impl Write) -> Result<(), PredictionError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k"];
    header.extend(BENCH_COLUMNS);
    w.write_record(&header).map_err(io_err)?;
    for r in rows {
        let mut rec = vec![r.k.to_string(), r.classifier.clone()];
        rec.extend(metric_fields(&r.metrics));
        w.write_record(&rec).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_trace_csv<F: Scalar>(trace: &[F], out: impl Write) -> Result<(), PredictionError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "best_fitness"]).map_err(io_err)?;
    for (t, f) in trace.iter().enumerate() {
        w.write_record([t.to_string(), format!("{:.6}", f.to_f64().unwrap())]).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn io_err(e: impl std::fmt::Display) -> PredictionError {
    PredictionError::Io(e.to_string())
}
