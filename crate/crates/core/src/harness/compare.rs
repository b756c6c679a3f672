use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::checkpoint::{load_checkpoint, save_checkpoint};
use super::config::ExperimentConfig;
use crate::analysis::two_sample_t_test;
use crate::error::{Error, Result};
use crate::learner::Decoder;
use crate::optimizer::{
    resume_stage, select_best_sequence, stage2_start, HistoryEntry, OptimizerRunState, Stage,
    StageOutcome, TeachingSetup,
};
use crate::rng::{self, domain};
use crate::schedule::{baseline_distribution, stationary, Multinomial, TimeVaryingDistribution};
use crate::vocab::{PoolSplit, Vocabulary};

pub const REPORT_VERSION: u32 = 1;
/// Condition name of the stage-one optimum.
pub const STATIONARY_OPTIMUM: &str = "p_bar_star";
/// Condition name of the stage-two optimum.
pub const OPTIMUM: &str = "pq_star";

pub const STAGE_ONE_CHECKPOINT: &str = "stage1.ckpt";
pub const STAGE_TWO_CHECKPOINT: &str = "stage2.ckpt";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub name: String,
    pub n: usize,
    pub mean_accuracy: f64,
    pub stderr: f64,
    /// Accuracy of the best of the `n` sampled sequences.
    pub best_sequence_accuracy: f64,
    pub best_sequence_index: usize,
    pub best_sequence_seed: u64,
    /// Welch test of this condition against the stage-two optimum; absent
    /// for the optimum itself or when both samples are constant.
    pub t_vs_optimum: Option<f64>,
    pub p_vs_optimum: Option<f64>,
    pub accuracies: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionRecord {
    pub name: String,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub version: u32,
    pub seed: u64,
    pub k: usize,
    pub horizon: usize,
    pub n_best: usize,
    pub pool_words: Vec<String>,
    pub test_size: usize,
    pub conditions: Vec<ConditionResult>,
    pub stage1_history: Vec<HistoryEntry>,
    pub stage2_history: Vec<HistoryEntry>,
    pub distributions: Vec<DistributionRecord>,
}

impl ComparisonReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Pretty JSON with a trailing newline; contains no timing data, so equal
    /// inputs give equal bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Everything derived from the config before any optimization.
pub struct Prepared {
    pub vocab: Vocabulary,
    pub split: PoolSplit,
}

impl Prepared {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let vocab = config.load_vocabulary()?;
        config.validate_for(&vocab)?;
        let split = config.split(&vocab)?;
        Ok(Self { vocab, split })
    }

    pub fn setup(&self, config: &ExperimentConfig) -> Result<TeachingSetup<'_>> {
        TeachingSetup::new(
            self.vocab.subset(&self.split.pool),
            self.vocab.subset(&self.split.test),
            Decoder::new(self.vocab.inventory()),
            &config.optimizer,
        )
    }
}

/// Run (or resume) one stage, checkpointing after every step when `dir` is
/// given. With `resume`, an existing checkpoint in `dir` replaces `initial`
/// if it belongs to the same run.
pub fn run_checkpointed_stage(
    initial: OptimizerRunState,
    setup: &TeachingSetup<'_>,
    dir: Option<&Path>,
    resume: bool,
) -> Result<StageOutcome> {
    let name = match initial.stage {
        Stage::One => STAGE_ONE_CHECKPOINT,
        Stage::Two => STAGE_TWO_CHECKPOINT,
    };
    let path: Option<PathBuf> = dir.map(|d| d.join(name));
    let mut state = initial;
    if let Some(p) = path.as_deref().filter(|p| resume && p.exists()) {
        let saved: OptimizerRunState = load_checkpoint(p)?;
        check_same_run(&saved, &state)?;
        log::info!("resuming stage {:?} at step {}", saved.stage, saved.step);
        state = saved;
    }
    let started = Instant::now();
    resume_stage(state, setup, |s, h| {
        log::info!(
            "stage {:?} step {} cost {:.4} +- {:.4} ({:.1}s)",
            s.stage,
            h.step,
            h.mean,
            h.stderr,
            started.elapsed().as_secs_f64()
        );
        match &path {
            Some(p) => save_checkpoint(s, p),
            None => Ok(()),
        }
    })
}

/// Resume an explicit checkpoint file, writing progress back to it.
pub fn resume_from(path: &Path, setup: &TeachingSetup<'_>) -> Result<StageOutcome> {
    let state: OptimizerRunState = load_checkpoint(path)?;
    resume_stage(state, setup, |s, h| {
        log::info!(
            "stage {:?} step {} cost {:.4} +- {:.4}",
            s.stage,
            h.step,
            h.mean,
            h.stderr
        );
        save_checkpoint(s, path)
    })
}

fn check_same_run(saved: &OptimizerRunState, fresh: &OptimizerRunState) -> Result<()> {
    if saved.stage != fresh.stage
        || saved.master_seed != fresh.master_seed
        || saved.k != fresh.k
        || saved.config != fresh.config
    {
        return Err(Error::Config(
            "checkpoint belongs to a different run (stage, seed, K or optimizer settings differ)"
                .into(),
        ));
    }
    if saved.step == 0 && saved.z != fresh.z {
        return Err(Error::Config(
            "checkpoint starts from a different point".into(),
        ));
    }
    Ok(())
}

pub fn stage1_state(config: &ExperimentConfig) -> Result<OptimizerRunState> {
    OptimizerRunState::uniform(Stage::One, config.optimizer, config.seed, config.k)
}

pub fn stage2_state(config: &ExperimentConfig, p_bar: &Multinomial) -> Result<OptimizerRunState> {
    stage2_start(p_bar, &config.optimizer, config.seed)
}

fn evaluate(
    name: &str,
    tvd: &TimeVaryingDistribution,
    setup: &TeachingSetup<'_>,
    n: usize,
    seed: u64,
) -> Result<ConditionResult> {
    let best = select_best_sequence(tvd, setup, n, seed)?;
    let accuracies: Vec<f64> = best.costs.iter().map(|c| 1.0 - c).collect();
    Ok(ConditionResult {
        name: name.to_string(),
        n,
        mean_accuracy: 1.0 - best.summary.mean,
        stderr: best.summary.stderr,
        best_sequence_accuracy: 1.0 - best.cost,
        best_sequence_index: best.index,
        best_sequence_seed: best.sequence.seed,
        t_vs_optimum: None,
        p_vs_optimum: None,
        accuracies,
    })
}

/// Baselines, the stage-one optimum and the stage-two optimum, each
/// evaluated on `n_best` sequences. All conditions share one evaluation
/// seed, so replicate `r` uses the same learner initialization everywhere.
pub fn run_comparison(
    config: &ExperimentConfig,
    checkpoint_dir: Option<&Path>,
    resume: bool,
) -> Result<ComparisonReport> {
    let prepared = Prepared::new(config)?;
    let pool = config.thread_pool()?;
    pool.install(|| compare_prepared(config, &prepared, checkpoint_dir, resume))
}

fn compare_prepared(
    config: &ExperimentConfig,
    prepared: &Prepared,
    checkpoint_dir: Option<&Path>,
    resume: bool,
) -> Result<ComparisonReport> {
    let setup = prepared.setup(config)?;
    let horizon = config.optimizer.horizon;
    let eval_seed = rng::mix(config.seed, &[domain::EVALUATION]);
    let mut conditions = Vec::new();
    let mut distributions = Vec::new();

    for kind in config.baseline_kinds()? {
        let p = baseline_distribution(&prepared.vocab, &prepared.split, &kind)?;
        let label = kind.label();
        log::info!("evaluating baseline {label}");
        conditions.push(evaluate(
            &label,
            &stationary(&p, horizon),
            &setup,
            config.n_best,
            eval_seed,
        )?);
        distributions.push(DistributionRecord {
            name: label,
            p: p.probs().to_vec(),
            q: p.probs().to_vec(),
        });
    }

    let one = run_checkpointed_stage(stage1_state(config)?, &setup, checkpoint_dir, resume)?;
    let two = run_checkpointed_stage(
        stage2_state(config, &one.p)?,
        &setup,
        checkpoint_dir,
        resume,
    )?;

    let p_bar = stationary(&one.p, horizon);
    conditions.push(evaluate(
        STATIONARY_OPTIMUM,
        &p_bar,
        &setup,
        config.n_best,
        eval_seed,
    )?);
    distributions.push(DistributionRecord {
        name: STATIONARY_OPTIMUM.into(),
        p: one.p.probs().to_vec(),
        q: one.q.probs().to_vec(),
    });
    let pq = TimeVaryingDistribution::new(two.p.clone(), two.q.clone(), horizon)?;
    conditions.push(evaluate(OPTIMUM, &pq, &setup, config.n_best, eval_seed)?);
    distributions.push(DistributionRecord {
        name: OPTIMUM.into(),
        p: two.p.probs().to_vec(),
        q: two.q.probs().to_vec(),
    });

    let reference = conditions
        .last()
        .expect("optimum present")
        .accuracies
        .clone();
    let last = conditions.len() - 1;
    for c in &mut conditions[..last] {
        match two_sample_t_test(&reference, &c.accuracies) {
            Ok(t) => {
                c.t_vs_optimum = Some(t.t);
                c.p_vs_optimum = Some(t.p_value);
            }
            Err(Error::ZeroVariance(_)) => {}
            Err(e) => return Err(e),
        }
    }

    Ok(ComparisonReport {
        version: REPORT_VERSION,
        seed: config.seed,
        k: config.k,
        horizon,
        n_best: config.n_best,
        pool_words: setup.pool.iter().map(|w| w.word.clone()).collect(),
        test_size: setup.test.len(),
        conditions,
        stage1_history: one.state.history,
        stage2_history: two.state.history,
        distributions,
    })
}
