use std::time::Instant;

use serde::Serialize;

use super::{Dataset, PredictionError, Scalar};

/// Anything that labels a feature row as 0 or 1.
pub trait Classifier<F>: Sync {
    fn name(&self) -> &str;
    fn predict(&self, query: &[F]) -> Result<u8, PredictionError>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    /// Positive class is 1.
    pub fn from_labels(truth: &[u8], predicted: &[u8]) -> Self {
        let mut c = Confusion::default();
        for (&y, &p) in truth.iter().zip(predicted) {
            match (y, p) {
                (1, 1) => c.tp += 1,
                (0, 0) => c.tn += 1,
                (0, _) => c.fp += 1,
                _ => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Which rates had a zero denominator and were reported as 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Degenerate {
    pub precision: bool,
    pub recall: bool,
    pub f_measure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub confusion: Confusion,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub rmse: f64,
    pub wall_time_ms: f64,
    pub degenerate: Degenerate,
}

impl MetricsReport {
    pub fn from_confusion(c: Confusion, wall_time_ms: f64) -> Self {
        let total = c.total() as f64;
        let mut degenerate = Degenerate::default();
        let ratio = |num: usize, den: usize, flag: &mut bool| {
            if den == 0 {
                *flag = true;
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(c.tp, c.tp + c.fp, &mut degenerate.precision);
        let recall = ratio(c.tp, c.tp + c.fn_, &mut degenerate.recall);
        let f_measure = if precision + recall == 0.0 {
            degenerate.f_measure = true;
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let (accuracy, rmse) = if total == 0.0 {
            (0.0, 0.0)
        } else {
            // Each miss contributes a squared error of exactly 1.
            ((c.tp + c.tn) as f64 / total, ((c.fp + c.fn_) as f64 / total).sqrt())
        };
        Self { confusion: c, accuracy, precision, recall, f_measure, rmse, wall_time_ms, degenerate }
    }

    pub fn error_rate(&self) -> f64 {
        let c = &self.confusion;
        if c.total() == 0 {
            0.0
        } else {
            (c.fp + c.fn_) as f64 / c.total() as f64
        }
    }
}

/// Predicts every test row and scores the predictions. Wall time covers the
/// prediction loop only.
pub fn evaluate<F: Scalar>(test: &Dataset<F>, classifier: &dyn Classifier<F>) -> Result<(MetricsReport, Vec<u8>), PredictionError> {
    if test.is_empty() {
        return Err(PredictionError::Config("empty test set".into()));
    }
    let start = Instant::now();
    let predicted = test
        .features
        .iter()
        .map(|row| classifier.predict(row))
        .collect::<Result<Vec<_>, _>>()?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let report = MetricsReport::from_confusion(Confusion::from_labels(&test.labels, &predicted), ms);
    Ok((report, predicted))
}
