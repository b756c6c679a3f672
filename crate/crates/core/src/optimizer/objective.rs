use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::OptimizerConfig;
use crate::error::{Error, Result};
use crate::learner::{self, Decoder, Dims, Hyper, LearnerState};
use crate::rng::{self, domain};
use crate::schedule::{sample_sequence, LogitVector, TimeVaryingDistribution, TrainingSequence};
use crate::vocab::WordItem;

/// Sample mean and standard error of a noisy objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub mean: f64,
    pub stderr: f64,
}

impl CostEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            stderr: 0.0,
        }
    }

    /// Mean and `sd / sqrt(n)` (sample sd, `n - 1` denominator; 0 for n = 1).
    pub fn from_samples(xs: &[f64]) -> Self {
        let (mean, sd) = mean_sd(xs);
        Self {
            mean,
            stderr: sd / (xs.len() as f64).sqrt(),
        }
    }
}

pub(crate) fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// A noisy scalar objective over `R^dim`.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    /// Estimate the expected objective at `z`, with all randomness derived
    /// from `seed`.
    fn evaluate(&self, z: &[f64], seed: u64) -> Result<CostEstimate>;

    /// Evaluate many points; results come back in input order whatever the
    /// scheduling.
    fn evaluate_many(&self, jobs: &[(Vec<f64>, u64)]) -> Result<Vec<CostEstimate>> {
        jobs.par_iter().map(|(z, s)| self.evaluate(z, *s)).collect()
    }
}

/// Deterministic `0.5 * |z|^2`, exposed for validating gradient estimates.
#[derive(Clone, Copy, Debug)]
pub struct QuadraticHook {
    pub dim: usize,
}

impl Objective for QuadraticHook {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, z: &[f64], _seed: u64) -> Result<CostEstimate> {
        if z.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                actual: z.len(),
            });
        }
        Ok(CostEstimate::exact(
            0.5 * z.iter().map(|x| x * x).sum::<f64>(),
        ))
    }
}

/// How a search vector maps onto `(P, Q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parametrization {
    /// `z = alpha` (length `K - 1`) and `P = Q`.
    Stationary,
    /// `z = alpha ++ beta` (length `2K - 2`).
    TimeVarying,
}

impl Parametrization {
    pub fn dim(self, k: usize) -> usize {
        match self {
            Self::Stationary => k - 1,
            Self::TimeVarying => 2 * (k - 1),
        }
    }

    pub fn decode(self, z: &[f64], k: usize, horizon: usize) -> Result<TimeVaryingDistribution> {
        if z.len() != self.dim(k) {
            return Err(Error::Shape {
                expected: self.dim(k),
                actual: z.len(),
            });
        }
        match self {
            Self::Stationary => {
                let a = LogitVector::new(z.to_vec())?;
                TimeVaryingDistribution::from_logits(&a, &a, horizon)
            }
            Self::TimeVarying => {
                let (a, b) = z.split_at(k - 1);
                TimeVaryingDistribution::from_logits(
                    &LogitVector::new(a.to_vec())?,
                    &LogitVector::new(b.to_vec())?,
                    horizon,
                )
            }
        }
    }
}

/// Everything needed to train a fresh learner on a sampled sequence and
/// score it on the test set.
#[derive(Clone, Debug)]
pub struct TeachingSetup<'a> {
    pub pool: Vec<&'a WordItem>,
    pub test: Vec<&'a WordItem>,
    pub decoder: Decoder,
    pub horizon: usize,
    pub hyper: Hyper,
    pub init_scale: f64,
}

impl<'a> TeachingSetup<'a> {
    pub fn new(
        pool: Vec<&'a WordItem>,
        test: Vec<&'a WordItem>,
        decoder: Decoder,
        config: &OptimizerConfig,
    ) -> Result<Self> {
        if pool.len() < 2 {
            return Err(Error::InvalidArgument(
                "training pool needs at least two items".into(),
            ));
        }
        if test.is_empty() {
            return Err(Error::Empty("test set"));
        }
        Ok(Self {
            pool,
            test,
            decoder,
            horizon: config.horizon,
            hyper: config.learner,
            init_scale: config.init_scale,
        })
    }

    pub fn k(&self) -> usize {
        self.pool.len()
    }

    /// Train a fresh learner on one sequence drawn from `tvd` and return the
    /// sequence with its terminal cost. The learner's initial weights and
    /// the sequence come from independent children of `replicate_seed`.
    pub fn run_replicate(
        &self,
        tvd: &TimeVaryingDistribution,
        replicate_seed: u64,
    ) -> Result<(TrainingSequence, f64)> {
        let seq = sample_sequence(tvd, rng::mix(replicate_seed, &[domain::SEQUENCE]));
        let mut state = LearnerState::init(
            Dims::READING,
            self.hyper,
            rng::mix(replicate_seed, &[domain::LEARNER_INIT]),
            self.init_scale,
        )?;
        learner::train_sequence(&mut state, &self.pool, &seq.item_indices)?;
        let cost = learner::terminal_cost(&state, &self.test, &self.decoder)?;
        Ok((seq, cost))
    }

    pub fn replicate_seed(seed: u64, r: usize) -> u64 {
        rng::mix(seed, &[r as u64])
    }

    /// Terminal costs of `n` replicates, in replicate order.
    pub fn costs(&self, tvd: &TimeVaryingDistribution, n: usize, seed: u64) -> Result<Vec<f64>> {
        (0..n)
            .into_par_iter()
            .map(|r| {
                self.run_replicate(tvd, Self::replicate_seed(seed, r))
                    .map(|(_, c)| c)
            })
            .collect()
    }
}

/// Expected terminal cost of the search vector `z` under a parametrization,
/// estimated from `n_seq` replicates.
pub struct LearnerObjective<'a> {
    pub setup: TeachingSetup<'a>,
    pub parametrization: Parametrization,
    pub n_seq: usize,
}

impl<'a> LearnerObjective<'a> {
    fn decode(&self, z: &[f64]) -> Result<TimeVaryingDistribution> {
        self.parametrization
            .decode(z, self.setup.k(), self.setup.horizon)
    }
}

impl Objective for LearnerObjective<'_> {
    fn dim(&self) -> usize {
        self.parametrization.dim(self.setup.k())
    }

    fn evaluate(&self, z: &[f64], seed: u64) -> Result<CostEstimate> {
        let tvd = self.decode(z)?;
        Ok(CostEstimate::from_samples(
            &self.setup.costs(&tvd, self.n_seq, seed)?,
        ))
    }

    fn evaluate_many(&self, jobs: &[(Vec<f64>, u64)]) -> Result<Vec<CostEstimate>> {
        let tvds = jobs
            .iter()
            .map(|(z, _)| self.decode(z))
            .collect::<Result<Vec<_>>>()?;
        let n = self.n_seq;
        let flat: Vec<f64> = (0..jobs.len() * n)
            .into_par_iter()
            .map(|j| {
                let (job, r) = (j / n, j % n);
                let seed = TeachingSetup::replicate_seed(jobs[job].1, r);
                self.setup.run_replicate(&tvds[job], seed).map(|(_, c)| c)
            })
            .collect::<Result<_>>()?;
        Ok(flat.chunks(n).map(CostEstimate::from_samples).collect())
    }
}

/// Mean and standard error of the terminal cost for `z`.
pub fn expected_terminal_cost(
    z: &[f64],
    setup: &TeachingSetup<'_>,
    parametrization: Parametrization,
    n_seq: usize,
    seed: u64,
) -> Result<CostEstimate> {
    if n_seq == 0 {
        return Err(Error::InvalidArgument("n_seq must be >= 1".into()));
    }
    let obj = LearnerObjective {
        setup: setup.clone(),
        parametrization,
        n_seq,
    };
    obj.evaluate(z, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestSequence {
    pub sequence: TrainingSequence,
    pub cost: f64,
    /// Replicate index of the winner.
    pub index: usize,
    /// Costs of all `N` sampled sequences, in replicate order.
    pub costs: Vec<f64>,
    pub summary: CostEstimate,
}

/// Train `n` learners on `n` sampled sequences and keep the cheapest one
/// (earliest on ties).
pub fn select_best_sequence(
    tvd: &TimeVaryingDistribution,
    setup: &TeachingSetup<'_>,
    n: usize,
    seed: u64,
) -> Result<BestSequence> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    if tvd.k() != setup.k() {
        return Err(Error::Shape {
            expected: setup.k(),
            actual: tvd.k(),
        });
    }
    let costs = setup.costs(tvd, n, seed)?;
    let mut index = 0;
    for (i, &c) in costs.iter().enumerate() {
        if c < costs[index] {
            index = i;
        }
    }
    let replicate = TeachingSetup::replicate_seed(seed, index);
    let sequence = sample_sequence(tvd, rng::mix(replicate, &[domain::SEQUENCE]));
    Ok(BestSequence {
        sequence,
        cost: costs[index],
        index,
        summary: CostEstimate::from_samples(&costs),
        costs,
    })
}
