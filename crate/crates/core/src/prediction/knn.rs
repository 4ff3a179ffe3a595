use super::{Dataset, PredictionError, Scalar};

pub fn euclidean<F: Scalar>(a: &[F], b: &[F]) -> Result<F, PredictionError> {
    if a.len() != b.len() {
        return Err(PredictionError::Dim { expected: a.len(), found: b.len() });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .fold(F::zero(), |acc, v| acc + v)
        .sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<F> {
    pub distance: F,
    pub label: u8,
    /// Row index in the training set.
    pub index: usize,
}

/// The k nearest training rows, closest first.
pub type NeighborSet<F> = Vec<Neighbor<F>>;

/// Ties on distance go to the lower row index.
pub fn knn_neighbors<F: Scalar>(query: &[F], train: &Dataset<F>, k: usize) -> Result<NeighborSet<F>, PredictionError> {
    if k == 0 || k > train.len() {
        return Err(PredictionError::Config(format!("k = {k} must lie in 1..={}", train.len())));
    }
    let mut all = train
        .features
        .iter()
        .zip(&train.labels)
        .enumerate()
        .map(|(index, (row, &label))| Ok(Neighbor { distance: euclidean(query, row)?, label, index }))
        .collect::<Result<Vec<_>, PredictionError>>()?;
    let by_rank = |a: &Neighbor<F>, b: &Neighbor<F>| {
        a.distance.partial_cmp(&b.distance).expect("distances are finite").then(a.index.cmp(&b.index))
    };
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, by_rank);
        all.truncate(k);
    }
    all.sort_unstable_by(by_rank);
    Ok(all)
}

/// Highest-scoring label; a tie goes to the closest neighbor whose label is
/// among the tied ones.
fn vote<F: Scalar>(phi: &[Neighbor<F>], score_of: impl Fn(usize) -> F) -> u8 {
    let mut scores = [F::zero(); 2];
    for (rank, n) in phi.iter().enumerate() {
        scores[usize::from(n.label.min(1))] = scores[usize::from(n.label.min(1))] + score_of(rank);
    }
    if scores[0] > scores[1] {
        0
    } else if scores[1] > scores[0] {
        1
    } else {
        phi[0].label
    }
}

/// Majority vote.
pub fn knn_predict<F: Scalar>(phi: &[Neighbor<F>]) -> u8 {
    assert!(!phi.is_empty(), "empty neighbor set");
    vote(phi, |_| F::one())
}

/// Vote where the neighbor at distance rank j counts `weights[j]`.
pub fn wknn_predict<F: Scalar>(phi: &[Neighbor<F>], weights: &[F]) -> Result<u8, PredictionError> {
    if weights.len() != phi.len() {
        return Err(PredictionError::Dim { expected: phi.len(), found: weights.len() });
    }
    if phi.is_empty() {
        return Err(PredictionError::Config("empty neighbor set".into()));
    }
    Ok(vote(phi, |rank| weights[rank]))
}
