use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{PredictionError, Scalar};

pub const MISSING_MARKER: &str = "?";

/// Feature rows with binary labels (1 = disease present).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    pub attributes: Vec<String>,
    pub features: Vec<Vec<F>>,
    pub labels: Vec<u8>,
}

impl<F: Scalar> Dataset<F> {
    /// Builds a dataset, checking that every row has the same width as
    /// `attributes`.
    pub fn new(attributes: Vec<String>, features: Vec<Vec<F>>, labels: Vec<u8>) -> Result<Self, PredictionError> {
        if features.len() != labels.len() {
            return Err(PredictionError::Dim { expected: features.len(), found: labels.len() });
        }
        if let Some(row) = features.iter().find(|r| r.len() != attributes.len()) {
            return Err(PredictionError::Dim { expected: attributes.len(), found: row.len() });
        }
        Ok(Self { attributes, features, labels })
    }

    /// Unnamed attributes `x0, x1, ...`.
    pub fn from_rows(features: Vec<Vec<F>>, labels: Vec<u8>) -> Result<Self, PredictionError> {
        let dim = features.first().map_or(0, Vec::len);
        let attributes = (0..dim).map(|i| format!("x{i}")).collect();
        Self::new(attributes, features, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.attributes.len()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            attributes: self.attributes.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.len() - ones, ones]
    }
}

/// Reads a CSV file with a header row; the last column is the target.
pub fn load_dataset<F: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<F>, PredictionError> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| PredictionError::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_dataset(file)
}

/// Parses CSV text. Rows containing the missing marker are dropped, and the
/// target is binarized: zero stays 0, any positive value becomes 1.
pub fn read_dataset<F: Scalar, R: Read>(reader: R) -> Result<Dataset<F>, PredictionError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| PredictionError::Format { line: 1, column: None, reason: e.to_string() })?
        .clone();
    if header.len() < 2 {
        return Err(PredictionError::Format {
            line: 1,
            column: None,
            reason: "need at least one feature column and a target column".into(),
        });
    }
    let width = header.len();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| PredictionError::Format {
            line: e.position().map_or(0, |p| p.line() as usize),
            column: None,
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != width {
            return Err(PredictionError::Format {
                line,
                column: None,
                reason: format!("expected {width} columns, found {}", record.len()),
            });
        }
        if record.iter().any(|cell| cell == MISSING_MARKER) {
            continue;
        }
        let mut row = Vec::with_capacity(width - 1);
        for (col, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                PredictionError::Format { line, column: Some(col + 1), reason: format!("cannot parse {cell:?}") }
            })?;
            if col + 1 == width {
                if value < 0.0 {
                    return Err(PredictionError::Format {
                        line,
                        column: Some(col + 1),
                        reason: "negative target".into(),
                    });
                }
                labels.push(u8::from(value > 0.0));
            } else {
                row.push(F::from_f64(value).expect("finite f64 converts to scalar"));
            }
        }
        features.push(row);
    }
    let attributes = header.iter().take(width - 1).map(str::to_string).collect();
    Dataset::new(attributes, features, labels)
}

/// Stratified shuffle split of `labels` indices. The first part gets
/// `round(ratio * n)` rows, shared between the classes by largest remainder.
/// Both parts are returned in ascending index order.
pub fn stratified_indices(labels: &[u8], ratio: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let n = labels.len();
    let target = (ratio * n as f64).round() as usize;
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        by_class[usize::from(l.min(1))].push(i);
    }
    let ideal: Vec<f64> = by_class.iter().map(|c| ratio * c.len() as f64).collect();
    let mut alloc: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| (ideal[b] - alloc[b] as f64).total_cmp(&(ideal[a] - alloc[a] as f64)));
    let mut remaining = target.saturating_sub(alloc.iter().sum());
    for &c in order.iter().cycle().take(4) {
        if remaining == 0 {
            break;
        }
        if alloc[c] < by_class[c].len() {
            alloc[c] += 1;
            remaining -= 1;
        }
    }
    let mut first = Vec::with_capacity(target);
    let mut second = Vec::with_capacity(n - target);
    for (c, members) in by_class.iter_mut().enumerate() {
        members.shuffle(rng);
        first.extend_from_slice(&members[..alloc[c]]);
        second.extend_from_slice(&members[alloc[c]..]);
    }
    first.sort_unstable();
    second.sort_unstable();
    (first, second)
}

/// Stratified train/test split; the same seed always gives the same split.
pub fn split<F: Scalar>(ds: &Dataset<F>, ratio: f64, seed: u64) -> (Dataset<F>, Dataset<F>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train, test) = stratified_indices(&ds.labels, ratio, &mut rng);
    (ds.subset(&train), ds.subset(&test))
}

/// Per-column rescaling to [0, 1] using the ranges seen at fit time.
/// Constant columns map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler<F> {
    pub min: Vec<F>,
    pub range: Vec<F>,
}

impl<F: Scalar> MinMaxScaler<F> {
    pub fn fit(ds: &Dataset<F>) -> Self {
        let dim = ds.dim();
        let mut min = vec![F::infinity(); dim];
        let mut max = vec![F::neg_infinity(); dim];
        for row in &ds.features {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        let range = min
            .iter()
            .zip(&max)
            .map(|(&lo, &hi)| if hi > lo { hi - lo } else { F::one() })
            .collect();
        let min = min.into_iter().map(|m| if m.is_finite() { m } else { F::zero() }).collect();
        Self { min, range }
    }

    pub fn transform_row(&self, row: &[F]) -> Vec<F> {
        row.iter()
            .zip(self.min.iter().zip(&self.range))
            .map(|(&v, (&lo, &r))| (v - lo) / r)
            .collect()
    }

    pub fn transform(&self, ds: &Dataset<F>) -> Dataset<F> {
        Dataset {
            attributes: ds.attributes.clone(),
            features: ds.features.iter().map(|r| self.transform_row(r)).collect(),
            labels: ds.labels.clone(),
        }
    }
}
