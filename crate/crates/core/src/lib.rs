//! Teaching-sequence optimization for a connectionist reading model.
//!
//! A small feed-forward network learns to map aligned spellings to
//! articulatory phoneme features one word at a time. The order in which
//! words are shown is drawn from a time-varying distribution that
//! interpolates between a start and an end multinomial over a training
//! pool; both multinomials are tuned with a zeroth-order momentum method so
//! that the trained network generalizes to held-out words.
//!
//! Modules:
//! - [`vocab`]: lexicon parsing, slot alignment, encoding, splits, synthetic lexicons
//! - [`learner`]: the 260-100-200 sigmoid network, Nesterov training, decoding, cost
//! - [`schedule`]: softmax parametrization, interpolated sampling, baselines
//! - [`optimizer`]: random-direction gradient estimates and the two-stage search
//! - [`analysis`]: word-level lexical variables and rank/t statistics
//! - [`harness`]: experiment orchestration, persistence and reports

pub mod analysis;
pub mod error;
pub mod harness;
pub mod learner;
pub mod optimizer;
pub mod rng;
pub mod schedule;
pub mod vocab;

pub use error::{Error, Result};
