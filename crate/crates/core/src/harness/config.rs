use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{ConvergenceCriteria, BATCH_LR};
use crate::optimizer::OptimizerConfig;
use crate::rng::{self, domain};
use crate::schedule::BaselineKind;
use crate::vocab::{
    generate_synthetic_vocabulary, parse_vocabulary_lenient, split_vocabulary, PhonemeInventory,
    PoolSplit, SyntheticSpec, Vocabulary,
};

/// Pool-size sweep settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EfficiencyConfig {
    pub ks: Vec<usize>,
    pub reps: usize,
    pub lr: f64,
    pub criteria: ConvergenceCriteria,
}

impl Default for EfficiencyConfig {
    fn default() -> Self {
        Self {
            ks: vec![20, 40, 60, 80, 100],
            reps: 10,
            lr: BATCH_LR,
            criteria: ConvergenceCriteria::default(),
        }
    }
}

/// One experiment, read from TOML. Every field has a default, so an empty
/// file describes the desk-scale synthetic comparison.
///
/// ```toml
/// seed = 7
/// k = 60
/// n_best = 50
/// baselines = ["uniform", "freq"]
/// # vocab = "words.tsv"      # omit to use the synthetic lexicon
///
/// [synthetic]
/// n_words = 300
/// exception_rate = 0.2
///
/// [optimizer]
/// steps = 40
/// horizon = 1500
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub out: PathBuf,
    /// Vocabulary TSV; when absent a synthetic lexicon is generated from
    /// `synthetic` and `seed`.
    pub vocab: Option<PathBuf>,
    /// Phoneme inventory file; the built-in inventory when absent.
    pub inventory: Option<PathBuf>,
    pub synthetic: SyntheticSpec,
    /// Pool size.
    pub k: usize,
    /// Sequences evaluated (and searched for the best one) per condition.
    pub n_best: usize,
    pub baselines: Vec<String>,
    pub optimizer: OptimizerConfig,
    pub efficiency: EfficiencyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: 0,
            out: PathBuf::from("out"),
            vocab: None,
            inventory: None,
            synthetic: SyntheticSpec::default(),
            k: 60,
            n_best: 50,
            baselines: vec!["uniform".into(), "freq".into()],
            optimizer: OptimizerConfig::default(),
            efficiency: EfficiencyConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn baseline_kinds(&self) -> Result<Vec<BaselineKind>> {
        self.baselines
            .iter()
            .map(|b| BaselineKind::parse(b))
            .collect()
    }

    /// Checks that do not need the vocabulary.
    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        if self.vocab.is_none() {
            self.synthetic.validate()?;
        }
        if self.n_best == 0 {
            return Err(Error::Config("n_best must be >= 1".into()));
        }
        self.baseline_kinds()?;
        Ok(())
    }

    pub fn inventory(&self) -> Result<PhonemeInventory> {
        match &self.inventory {
            None => Ok(PhonemeInventory::builtin()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                PhonemeInventory::parse(&text)
            }
        }
    }

    /// The experiment's vocabulary. Rows of a TSV file that fail to parse
    /// are dropped and logged.
    pub fn load_vocabulary(&self) -> Result<Vocabulary> {
        let inventory = self.inventory()?;
        match &self.vocab {
            None => Ok(generate_synthetic_vocabulary(&self.synthetic, self.seed)?.vocabulary),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                let parsed = parse_vocabulary_lenient(&text, &inventory)?;
                for e in &parsed.rejected {
                    log::warn!("skipped: {e}");
                }
                Ok(parsed.vocabulary)
            }
        }
    }

    /// Checks against the loaded vocabulary: `K < |V|` and every baseline
    /// column exists.
    pub fn validate_for(&self, vocab: &Vocabulary) -> Result<()> {
        self.validate()?;
        if self.k == 0 || self.k >= vocab.len() {
            return Err(Error::Config(format!(
                "k = {} must satisfy 0 < k < |V| = {}",
                self.k,
                vocab.len()
            )));
        }
        let columns = vocab.weight_columns();
        for kind in self.baseline_kinds()? {
            if let BaselineKind::Column { name, .. } = &kind {
                if !columns.contains(name) {
                    return Err(Error::Config(format!(
                        "baseline column '{name}' not in vocabulary"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The pool/test split used by every command for this seed.
    pub fn split(&self, vocab: &Vocabulary) -> Result<PoolSplit> {
        split_vocabulary(vocab.len(), self.k, rng::mix(self.seed, &[domain::SPLIT]))
    }

    /// A pool of `threads` workers (0 = all cores).
    pub fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))
    }
}
