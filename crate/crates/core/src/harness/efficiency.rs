use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{
    self, batch_train_to_convergence, ConvergenceCriteria, Decoder, LearnerState,
};
use crate::rng::{self, domain};
use crate::vocab::{split_vocabulary, PoolSplit, Vocabulary, WordItem};

/// Linear-interpolation quantile of sorted data (`q` in `[0, 1]`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// The split with the highest test accuracy for one `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestSplit {
    pub rep: usize,
    pub efficiency: f64,
    pub test_accuracy: f64,
    pub split: PoolSplit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub k: usize,
    pub reps: usize,
    pub mean: f64,
    pub q25: f64,
    pub q75: f64,
    /// `c / K` per repetition.
    pub efficiencies: Vec<f64>,
    pub epochs: Vec<usize>,
    pub best: BestSplit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub seed: u64,
    pub rows: Vec<EfficiencyRow>,
}

struct Rep {
    efficiency: f64,
    test_accuracy: f64,
    epochs: usize,
    split: PoolSplit,
}

/// For each `K` and repetition: draw a split, batch-train a fresh learner on
/// the pool to convergence and record `c / K`, where `c` counts test words
/// read correctly.
pub fn efficiency_experiment(
    vocab: &Vocabulary,
    ks: &[usize],
    reps: usize,
    lr: f64,
    criteria: &ConvergenceCriteria,
    seed: u64,
) -> Result<EfficiencyReport> {
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be >= 1".into()));
    }
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k >= vocab.len()) {
        return Err(Error::InvalidArgument(format!(
            "pool size {k} must satisfy 0 < K < {}",
            vocab.len()
        )));
    }
    let decoder = Decoder::new(vocab.inventory());
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let results: Vec<Rep> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let s = rng::mix(seed, &[domain::EFFICIENCY, k as u64, r as u64]);
                let split = split_vocabulary(vocab.len(), k, s)?;
                let pool: Vec<&WordItem> = vocab.subset(&split.pool);
                let test: Vec<&WordItem> = vocab.subset(&split.test);
                let init = LearnerState::reading(rng::mix(s, &[domain::LEARNER_INIT]));
                let (trained, epochs) =
                    batch_train_to_convergence(&init, &pool, lr, criteria, &decoder)?;
                let c = learner::count_correct(&trained, &test, &decoder)?;
                Ok(Rep {
                    efficiency: c as f64 / k as f64,
                    test_accuracy: c as f64 / test.len() as f64,
                    epochs,
                    split,
                })
            })
            .collect::<Result<_>>()?;
        let efficiencies: Vec<f64> = results.iter().map(|r| r.efficiency).collect();
        let mut sorted = efficiencies.clone();
        sorted.sort_by(f64::total_cmp);
        let mut best = 0;
        for (i, r) in results.iter().enumerate() {
            if r.test_accuracy > results[best].test_accuracy {
                best = i;
            }
        }
        let b = &results[best];
        rows.push(EfficiencyRow {
            k,
            reps,
            mean: efficiencies.iter().sum::<f64>() / reps as f64,
            q25: quantile_sorted(&sorted, 0.25),
            q75: quantile_sorted(&sorted, 0.75),
            epochs: results.iter().map(|r| r.epochs).collect(),
            efficiencies,
            best: BestSplit {
                rep: best,
                efficiency: b.efficiency,
                test_accuracy: b.test_accuracy,
                split: b.split.clone(),
            },
        });
    }
    Ok(EfficiencyReport { seed, rows })
}
