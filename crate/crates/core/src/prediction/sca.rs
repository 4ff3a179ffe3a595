use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dataset::stratified_indices;
use super::knn::{knn_neighbors, wknn_predict, NeighborSet};
use super::{Dataset, PredictionError, Scalar};

/// Share of the training rows held out to score agents.
pub const VALIDATION_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaConfig<F> {
    /// Population size N.
    pub population: usize,
    /// Iterations T.
    pub iterations: usize,
    /// Initial amplitude of the step schedule.
    pub a: F,
    pub k: usize,
    pub seed: u64,
}

impl<F: Scalar> ScaConfig<F> {
    pub fn new(population: usize, iterations: usize, k: usize, seed: u64) -> Self {
        Self { population, iterations, a: F::from_f64(2.0).unwrap(), k, seed }
    }

    pub fn validate(&self) -> Result<(), PredictionError> {
        if self.population < 2 {
            return Err(PredictionError::Config("population must be at least 2".into()));
        }
        if self.k == 0 {
            return Err(PredictionError::Config("k must be positive".into()));
        }
        if self.a.is_nan() || self.a <= F::zero() {
            return Err(PredictionError::Config("a must be positive".into()));
        }
        Ok(())
    }
}

/// Random draws for one dimension of one position update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateParams<F> {
    pub r1: F,
    /// In [0, 2π].
    pub r2: F,
    /// In [0, 2].
    pub r3: F,
    /// In [0, 1); below one half selects the sine branch.
    pub r4: F,
}

impl<F: Scalar> UpdateParams<F> {
    pub fn draw(r1: F, rng: &mut impl Rng) -> Self {
        let f = |x: f64| F::from_f64(x).unwrap();
        Self {
            r1,
            r2: f(rng.random::<f64>() * std::f64::consts::TAU),
            r3: f(rng.random::<f64>() * 2.0),
            r4: f(rng.random::<f64>()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent<F> {
    /// One weight per neighbor rank, each in [0, 1].
    pub weights: Vec<F>,
    /// Validation accuracy, once evaluated.
    pub fitness: Option<F>,
}

impl<F: Scalar> Agent<F> {
    pub fn new(weights: Vec<F>) -> Self {
        Self { weights, fitness: None }
    }

    pub fn uniform(k: usize) -> Self {
        Self::new(vec![F::one(); k])
    }
}

/// Step amplitude r1 at iteration t: falls linearly from `a` at t = 0 to
/// zero at t = T.
pub fn sca_schedule<F: Scalar>(t: usize, cfg: &ScaConfig<F>) -> F {
    if cfg.iterations == 0 {
        return F::zero();
    }
    let remaining = F::from_usize(cfg.iterations - t.min(cfg.iterations)).unwrap();
    cfg.a * (remaining / F::from_usize(cfg.iterations).unwrap())
}

/// Moves `agent` relative to `best`, one parameter set per dimension.
/// Weights are clamped to [0, 1]. The fitness is cleared.
pub fn sca_update<F: Scalar>(agent: &Agent<F>, best: &Agent<F>, params: &[UpdateParams<F>]) -> Result<Agent<F>, PredictionError> {
    let k = agent.weights.len();
    if best.weights.len() != k {
        return Err(PredictionError::Dim { expected: k, found: best.weights.len() });
    }
    if params.len() != k {
        return Err(PredictionError::Dim { expected: k, found: params.len() });
    }
    let half = F::from_f64(0.5).unwrap();
    let weights = agent
        .weights
        .iter()
        .zip(&best.weights)
        .zip(params)
        .map(|((&x, &b), p)| {
            let wave = if p.r4 < half { p.r2.sin() } else { p.r2.cos() };
            let moved = x + p.r1 * wave * (p.r3 * b - x).abs();
            moved.max(F::zero()).min(F::one())
        })
        .collect();
    Ok(Agent::new(weights))
}

/// Neighbor sets of a fixed validation fold, precomputed so agents can be
/// scored without recomputing distances.
#[derive(Debug, Clone)]
pub struct FitnessFold<F> {
    pub neighbors: Vec<NeighborSet<F>>,
    pub labels: Vec<u8>,
}

impl<F: Scalar> FitnessFold<F> {
    /// Stratified split of `train`: the validation rows take their neighbors
    /// from the remaining rows only.
    pub fn from_train(train: &Dataset<F>, k: usize, rng: &mut ChaCha8Rng) -> Result<Self, PredictionError> {
        let (reference, validation) = stratified_indices(&train.labels, 1.0 - VALIDATION_FRACTION, rng);
        if validation.is_empty() || reference.len() < k {
            return Err(PredictionError::Config(format!(
                "{} training rows cannot hold a validation fold with k = {k}",
                train.len()
            )));
        }
        let reference = train.subset(&reference);
        let neighbors = validation
            .par_iter()
            .map(|&i| knn_neighbors(&train.features[i], &reference, k))
            .collect::<Result<Vec<_>, _>>()?;
        let labels = validation.iter().map(|&i| train.labels[i]).collect();
        Ok(Self { neighbors, labels })
    }

    pub fn accuracy(&self, weights: &[F]) -> Result<F, PredictionError> {
        let mut hits = 0usize;
        for (phi, &y) in self.neighbors.iter().zip(&self.labels) {
            if wknn_predict(phi, weights)? == y {
                hits += 1;
            }
        }
        Ok(F::from_usize(hits).unwrap() / F::from_usize(self.labels.len()).unwrap())
    }
}

/// Result of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome<F> {
    pub best: Agent<F>,
    /// Best fitness after initialization, then after each iteration.
    pub trace: Vec<F>,
}

fn agent_rng(seed: u64, agent: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(agent as u64 + 1);
    rng
}

/// Searches neighbor-rank weights that maximize validation accuracy.
///
/// Each agent draws from its own random stream (master seed, stream =
/// agent index + 1); stream 0 picks the validation fold. Agents are scored
/// in parallel, and the elite is replaced only on strict improvement, in
/// agent order, so the outcome does not depend on the thread count.
pub fn sca_optimize<F: Scalar>(train: &Dataset<F>, cfg: &ScaConfig<F>) -> Result<ScaOutcome<F>, PredictionError> {
    cfg.validate()?;
    let mut fold_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fold = FitnessFold::from_train(train, cfg.k, &mut fold_rng)?;
    sca_optimize_on(&fold, cfg)
}

/// [`sca_optimize`] against an already built fold.
pub fn sca_optimize_on<F: Scalar>(fold: &FitnessFold<F>, cfg: &ScaConfig<F>) -> Result<ScaOutcome<F>, PredictionError> {
    cfg.validate()?;
    let mut rngs: Vec<ChaCha8Rng> = (0..cfg.population).map(|i| agent_rng(cfg.seed, i)).collect();
    let mut agents: Vec<Agent<F>> = rngs
        .iter_mut()
        .map(|rng| Agent::new((0..cfg.k).map(|_| F::from_f64(rng.random::<f64>()).unwrap()).collect()))
        .collect();

    let score = |agents: &mut Vec<Agent<F>>| -> Result<(), PredictionError> {
        let fits = agents
            .par_iter()
            .map(|a| fold.accuracy(&a.weights))
            .collect::<Result<Vec<_>, _>>()?;
        for (a, f) in agents.iter_mut().zip(fits) {
            a.fitness = Some(f);
        }
        Ok(())
    };
    let promote = |best: &mut Option<Agent<F>>, agents: &[Agent<F>]| {
        for a in agents {
            let better = match best {
                None => true,
                Some(b) => a.fitness > b.fitness,
            };
            if better {
                *best = Some(a.clone());
            }
        }
    };

    score(&mut agents)?;
    let mut best = None;
    promote(&mut best, &agents);
    let mut best = best.expect("population is non-empty");
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    trace.push(best.fitness.unwrap());

    for t in 0..cfg.iterations {
        let r1 = sca_schedule(t, cfg);
        agents = agents
            .par_iter()
            .zip(rngs.par_iter_mut())
            .map(|(a, rng)| {
                let params: Vec<_> = (0..cfg.k).map(|_| UpdateParams::draw(r1, rng)).collect();
                sca_update(a, &best, &params)
            })
            .collect::<Result<Vec<_>, _>>()?;
        score(&mut agents)?;
        let mut elite = Some(best);
        promote(&mut elite, &agents);
        best = elite.expect("elite is kept");
        trace.push(best.fitness.unwrap());
    }
    Ok(ScaOutcome { best, trace })
}

/// Labels `query` with the optimized neighbor weights.
pub fn sca_wknn_predict<F: Scalar>(query: &[F], train: &Dataset<F>, best: &Agent<F>, k: usize) -> Result<u8, PredictionError> {
    if best.weights.len() != k {
        return Err(PredictionError::Dim { expected: k, found: best.weights.len() });
    }
    let phi = knn_neighbors(query, train, k)?;
    wknn_predict(&phi, &best.weights)
}
