//! Experiment orchestration: configuration, the pool-size sweep, the
//! baseline comparison, checkpoints and report files.

mod checkpoint;
mod compare;
mod config;
mod efficiency;
mod report;

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, Checkpointable,
    CHECKPOINT_VERSION,
};
pub use compare::{
    resume_from, run_checkpointed_stage, run_comparison, stage1_state, stage2_state,
    ComparisonReport, ConditionResult, DistributionRecord, Prepared, OPTIMUM, REPORT_VERSION,
    STAGE_ONE_CHECKPOINT, STAGE_TWO_CHECKPOINT, STATIONARY_OPTIMUM,
};
pub use config::{EfficiencyConfig, ExperimentConfig};
pub use efficiency::{
    efficiency_experiment, quantile_sorted, BestSplit, EfficiencyReport, EfficiencyRow,
};
pub use report::{emit_reports, Report};
