//! Zeroth-order search over sampling distributions.
//!
//! The search vector holds free softmax logits: `alpha` alone when the
//! schedule is stationary, `alpha ++ beta` when it varies over time. Each
//! step estimates the gradient of the expected terminal cost from random
//! forward differences and applies a momentum update.

mod gradient;
mod objective;

pub use gradient::{
    baseline_seed, estimate_along, estimate_gradient, sample_directions, sample_unit_vector,
    GradientEstimate,
};
pub use objective::{
    expected_terminal_cost, select_best_sequence, BestSequence, CostEstimate, LearnerObjective,
    Objective, Parametrization, QuadraticHook, TeachingSetup,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{Hyper, DEFAULT_INIT_SCALE};
use crate::rng::{self, domain};
use crate::schedule::{LogitVector, Multinomial, TimeVaryingDistribution};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Step size.
    pub eta: f64,
    /// Momentum coefficient.
    pub gamma: f64,
    /// Perturbation radius.
    pub delta: f64,
    pub n_dirs: usize,
    /// Sequences sampled per objective evaluation.
    pub n_seq: usize,
    /// Optimizer steps per stage.
    pub steps: usize,
    /// Training sequence length.
    pub horizon: usize,
    /// Evaluate every perturbed point with the same learner seeds as the
    /// unperturbed one.
    pub common_random_numbers: bool,
    pub learner: Hyper,
    pub init_scale: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            eta: 0.01,
            gamma: 0.9,
            delta: 0.01,
            n_dirs: 12,
            n_seq: 5,
            steps: 40,
            horizon: 1500,
            common_random_numbers: true,
            learner: Hyper::default(),
            init_scale: DEFAULT_INIT_SCALE,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {x}")))
            }
        };
        positive("eta", self.eta)?;
        positive("delta", self.delta)?;
        positive("lr", self.learner.lr)?;
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config(format!(
                "gamma must be in [0, 1), got {}",
                self.gamma
            )));
        }
        if !(0.0..1.0).contains(&self.learner.momentum) {
            return Err(Error::Config(format!(
                "learner momentum must be in [0, 1), got {}",
                self.learner.momentum
            )));
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(Error::Config(format!(
                "init_scale must be >= 0, got {}",
                self.init_scale
            )));
        }
        if self.n_dirs == 0 || self.n_seq == 0 {
            return Err(Error::Config("n_dirs and n_seq must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    One,
    Two,
}

impl Stage {
    pub fn parametrization(self) -> Parametrization {
        match self {
            Self::One => Parametrization::Stationary,
            Self::Two => Parametrization::TimeVarying,
        }
    }

    fn domain(self) -> u64 {
        match self {
            Self::One => domain::STAGE_ONE,
            Self::Two => domain::STAGE_TWO,
        }
    }
}

/// Objective estimate at the iterate of a given step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub step: usize,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestIterate {
    pub step: usize,
    pub z: Vec<f64>,
    pub cost: CostEstimate,
}

/// Complete, resumable state of one optimization stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerRunState {
    pub stage: Stage,
    pub config: OptimizerConfig,
    pub master_seed: u64,
    /// Pool size.
    pub k: usize,
    pub z: Vec<f64>,
    /// Momentum buffer.
    pub velocity: Vec<f64>,
    /// Updates applied so far.
    pub step: usize,
    pub history: Vec<HistoryEntry>,
    pub best: Option<BestIterate>,
}

impl OptimizerRunState {
    pub fn new(
        stage: Stage,
        config: OptimizerConfig,
        master_seed: u64,
        k: usize,
        z0: Vec<f64>,
    ) -> Result<Self> {
        config.validate()?;
        if k < 2 {
            return Err(Error::InvalidArgument("K must be >= 2".into()));
        }
        let dim = stage.parametrization().dim(k);
        if z0.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                actual: z0.len(),
            });
        }
        if z0.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("initial logits"));
        }
        Ok(Self {
            stage,
            config,
            master_seed,
            k,
            velocity: vec![0.0; dim],
            z: z0,
            step: 0,
            history: Vec::new(),
            best: None,
        })
    }

    /// Uniform start: every free logit equal to the fixed one.
    pub fn uniform(
        stage: Stage,
        config: OptimizerConfig,
        master_seed: u64,
        k: usize,
    ) -> Result<Self> {
        let dim = stage.parametrization().dim(k.max(2));
        Self::new(stage, config, master_seed, k, vec![LogitVector::FIXED; dim])
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.config.steps && self.history.len() > self.config.steps
    }

    /// Seed for the gradient estimate (or final evaluation) at `step`.
    pub fn step_seed(&self, step: usize) -> u64 {
        rng::mix(self.master_seed, &[self.stage.domain(), step as u64])
    }

    /// The current iterate as a schedule.
    pub fn distribution(&self) -> Result<TimeVaryingDistribution> {
        self.stage
            .parametrization()
            .decode(&self.z, self.k, self.config.horizon)
    }

    /// The best iterate as a schedule (the current one before any record).
    pub fn best_distribution(&self) -> Result<TimeVaryingDistribution> {
        let z = self.best.as_ref().map_or(&self.z, |b| &b.z);
        self.stage
            .parametrization()
            .decode(z, self.k, self.config.horizon)
    }

    fn record(&mut self, cost: CostEstimate) {
        let step = self.step;
        self.history.push(HistoryEntry {
            step,
            mean: cost.mean,
            stderr: cost.stderr,
        });
        if self.best.as_ref().is_none_or(|b| cost.mean < b.cost.mean) {
            self.best = Some(BestIterate {
                step,
                z: self.z.clone(),
                cost,
            });
        }
    }
}

/// `velocity = gamma * velocity + eta * g; z -= velocity`.
pub fn sgd_step(state: &mut OptimizerRunState, gradient: &[f64]) -> Result<()> {
    if gradient.len() != state.z.len() {
        return Err(Error::Shape {
            expected: state.z.len(),
            actual: gradient.len(),
        });
    }
    if gradient.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    let (eta, gamma) = (state.config.eta, state.config.gamma);
    for ((z, v), g) in state.z.iter_mut().zip(&mut state.velocity).zip(gradient) {
        *v = gamma * *v + eta * g;
        *z -= *v;
    }
    state.step += 1;
    Ok(())
}

/// Run `state` to completion, calling `on_step` after each recorded
/// evaluation. The callback sees the state with the update applied, so
/// saving it there yields a resumable checkpoint. Resuming from any such
/// checkpoint reproduces the uninterrupted run exactly.
pub fn run_stage<O, F>(state: &mut OptimizerRunState, objective: &O, mut on_step: F) -> Result<()>
where
    O: Objective + ?Sized,
    F: FnMut(&OptimizerRunState, &HistoryEntry) -> Result<()>,
{
    if objective.dim() != state.z.len() {
        return Err(Error::Shape {
            expected: state.z.len(),
            actual: objective.dim(),
        });
    }
    if state.history.len() != state.step && !state.is_finished() {
        return Err(Error::InvalidArgument(format!(
            "inconsistent run state: {} history entries at step {}",
            state.history.len(),
            state.step
        )));
    }
    let cfg = state.config;
    while state.step < cfg.steps {
        let seed = state.step_seed(state.step);
        let est = estimate_gradient(
            objective,
            &state.z,
            cfg.n_dirs,
            cfg.delta,
            seed,
            cfg.common_random_numbers,
        )?;
        state.record(est.baseline);
        let entry = *state.history.last().expect("just recorded");
        sgd_step(state, &est.gradient)?;
        on_step(state, &entry)?;
    }
    if state.history.len() == cfg.steps {
        let seed = baseline_seed(state.step_seed(cfg.steps));
        let cost = objective.evaluate(&state.z, seed)?;
        state.record(cost);
        let entry = *state.history.last().expect("just recorded");
        on_step(state, &entry)?;
    }
    Ok(())
}

/// Result of a full stage.
#[derive(Clone, Debug)]
pub struct StageOutcome {
    pub state: OptimizerRunState,
    pub best: BestIterate,
    pub p: Multinomial,
    pub q: Multinomial,
}

impl StageOutcome {
    fn from_state(state: OptimizerRunState) -> Result<Self> {
        let best = state
            .best
            .clone()
            .ok_or(Error::Empty("optimizer history"))?;
        let tvd = state.best_distribution()?;
        Ok(Self {
            p: tvd.start().clone(),
            q: tvd.end().clone(),
            best,
            state,
        })
    }
}

/// Stage one: optimize a single stationary distribution from uniform.
pub fn optimize_stage1(
    setup: &TeachingSetup<'_>,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<StageOutcome> {
    let state = OptimizerRunState::uniform(Stage::One, *config, seed, setup.k())?;
    resume_stage(state, setup, |_, _| Ok(()))
}

/// Stage two: optimize `(P, Q)` starting from `P = Q = p_bar`.
pub fn optimize_stage2(
    setup: &TeachingSetup<'_>,
    p_bar: &Multinomial,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<StageOutcome> {
    let state = stage2_start(p_bar, config, seed)?;
    resume_stage(state, setup, |_, _| Ok(()))
}

/// Initial stage-two state for a stage-one optimum.
pub fn stage2_start(
    p_bar: &Multinomial,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<OptimizerRunState> {
    let a = LogitVector::from_multinomial(p_bar)?;
    let mut z0 = a.free.clone();
    z0.extend_from_slice(&a.free);
    OptimizerRunState::new(Stage::Two, *config, seed, p_bar.k(), z0)
}

/// Continue (or start) a stage with a per-step callback.
pub fn resume_stage<F>(
    mut state: OptimizerRunState,
    setup: &TeachingSetup<'_>,
    on_step: F,
) -> Result<StageOutcome>
where
    F: FnMut(&OptimizerRunState, &HistoryEntry) -> Result<()>,
{
    if setup.k() != state.k {
        return Err(Error::Shape {
            expected: state.k,
            actual: setup.k(),
        });
    }
    let mut setup = setup.clone();
    setup.horizon = state.config.horizon;
    setup.hyper = state.config.learner;
    setup.init_scale = state.config.init_scale;
    let objective = LearnerObjective {
        setup,
        parametrization: state.stage.parametrization(),
        n_seq: state.config.n_seq,
    };
    run_stage(&mut state, &objective, on_step)?;
    StageOutcome::from_state(state)
}
