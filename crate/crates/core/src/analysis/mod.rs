//! Word-level variables and the statistics used to relate them to an
//! optimized sampling distribution.

mod stats;

pub use stats::{
    average_ranks, pearson, spearman_rho, spearman_rho_with, two_sample_t_test, Correlation,
    PValueMethod, TTest, MAX_EXACT_N,
};

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::Multinomial;
use crate::vocab::{Vocabulary, WordItem};

/// Significance level used to flag correlation rows.
pub const ALPHA: f64 = 0.05;

/// Optional numeric columns reported when the vocabulary carries them.
pub const PASS_THROUGH: [&str; 4] = ["aoa", "child_freq", "adult_freq", "morphology"];

/// Unit-cost edit distance over characters.
pub fn levenshtein(a: &str, b: &str) -> usize {
    strsim::levenshtein(a, b)
}

/// Other words at edit distance exactly one.
pub fn orthographic_neighbors(vocab: &Vocabulary, word: &str) -> Result<usize> {
    vocab.find(word)?;
    let n = word.chars().count();
    Ok(vocab
        .items()
        .iter()
        .filter(|it| it.word != word && it.word.chars().count().abs_diff(n) <= 1)
        .filter(|it| levenshtein(&it.word, word) == 1)
        .count())
}

/// [`orthographic_neighbors`] for every word, in vocabulary order.
pub fn orthographic_neighbor_counts(vocab: &Vocabulary) -> Vec<usize> {
    let mut by_len: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, it) in vocab.items().iter().enumerate() {
        by_len.entry(it.word.chars().count()).or_default().push(i);
    }
    let items = vocab.items();
    let mut counts = vec![0; items.len()];
    for (i, it) in items.iter().enumerate() {
        let n = it.word.chars().count();
        for len in n.saturating_sub(1)..=n + 1 {
            for &j in by_len.get(&len).into_iter().flatten() {
                if j > i && levenshtein(&it.word, &items[j].word) == 1 {
                    counts[i] += 1;
                    counts[j] += 1;
                }
            }
        }
    }
    counts
}

fn body_rime_key(item: &WordItem) -> (String, Vec<String>) {
    (item.segmentation.body(), item.rime().to_vec())
}

/// Other words sharing both the orthographic body and the phonological rime.
pub fn phonological_neighbors(vocab: &Vocabulary, word: &str) -> Result<usize> {
    let item = vocab.find(word)?;
    let key = body_rime_key(item);
    Ok(vocab
        .items()
        .iter()
        .filter(|it| it.word != word && body_rime_key(it) == key)
        .count())
}

/// [`phonological_neighbors`] for every word, in vocabulary order.
pub fn phonological_neighbor_counts(vocab: &Vocabulary) -> Vec<usize> {
    let mut groups: HashMap<(String, Vec<String>), usize> = HashMap::new();
    for it in vocab.items() {
        *groups.entry(body_rime_key(it)).or_default() += 1;
    }
    vocab
        .items()
        .iter()
        .map(|it| groups[&body_rime_key(it)] - 1)
        .collect()
}

/// Number of phonological features switched on.
pub fn phonological_density(item: &WordItem) -> usize {
    item.y.iter().filter(|&&b| b == 1.0).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    /// Onset consonants plus the vowel grapheme.
    Oncleus,
    Vowel,
    /// Vowel grapheme plus coda.
    Rime,
}

impl Unit {
    pub const ALL: [Unit; 3] = [Unit::Oncleus, Unit::Vowel, Unit::Rime];

    pub fn name(self) -> &'static str {
        match self {
            Self::Oncleus => "oncleus_entropy",
            Self::Vowel => "vowel_entropy",
            Self::Rime => "rime_entropy",
        }
    }

    fn spelling(self, item: &WordItem) -> String {
        let s = &item.segmentation;
        match self {
            Self::Oncleus => s.oncleus(),
            Self::Vowel => s.vowel.clone(),
            Self::Rime => s.body(),
        }
    }

    fn realization(self, item: &WordItem) -> Vec<String> {
        match self {
            Self::Oncleus => {
                let mut p = item.onset_phonemes().to_vec();
                p.push(item.vowel_code().to_string());
                p
            }
            Self::Vowel => vec![item.vowel_code().to_string()],
            Self::Rime => item.rime().to_vec(),
        }
    }
}

/// Shannon entropy in bits of a weighted distribution.
pub fn entropy_bits(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let h: f64 = weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// For each word, the entropy of the pronunciations of its orthographic unit
/// across the vocabulary. Each word type counts once unless `token_weights`
/// names a weight column, in which case words count by that weight.
pub fn unit_entropy(
    vocab: &Vocabulary,
    unit: Unit,
    token_weights: Option<&str>,
) -> Result<BTreeMap<String, f64>> {
    let per_item = unit_entropies(vocab, unit, token_weights)?;
    Ok(vocab
        .items()
        .iter()
        .zip(per_item)
        .map(|(it, h)| (it.word.clone(), h))
        .collect())
}

fn unit_entropies(vocab: &Vocabulary, unit: Unit, token_weights: Option<&str>) -> Result<Vec<f64>> {
    let mut table: HashMap<String, BTreeMap<Vec<String>, f64>> = HashMap::new();
    for it in vocab.items() {
        let w = match token_weights {
            None => 1.0,
            Some(col) => it.weight(col).ok_or_else(|| Error::MissingColumn {
                column: col.to_string(),
                word: it.word.clone(),
            })?,
        };
        *table
            .entry(unit.spelling(it))
            .or_default()
            .entry(unit.realization(it))
            .or_default() += w;
    }
    let entropy: HashMap<&String, f64> = table
        .iter()
        .map(|(k, m)| (k, entropy_bits(&m.values().copied().collect::<Vec<_>>())))
        .collect();
    Ok(vocab
        .items()
        .iter()
        .map(|it| entropy[&unit.spelling(it)])
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordVariables {
    pub word: String,
    pub orth_length: usize,
    pub phon_length: usize,
    pub orth_neighbors: usize,
    pub phon_neighbors: usize,
    pub phon_density: usize,
    pub oncleus_entropy: f64,
    pub vowel_entropy: f64,
    pub rime_entropy: f64,
    /// Pass-through numeric columns present on this word.
    pub extra: BTreeMap<String, f64>,
}

impl WordVariables {
    /// Names of the always-present variables, in report order.
    pub const CORE: [&'static str; 8] = [
        "orth_length",
        "phon_length",
        "orth_neighbors",
        "phon_neighbors",
        "phon_density",
        "oncleus_entropy",
        "vowel_entropy",
        "rime_entropy",
    ];

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "orth_length" => self.orth_length as f64,
            "phon_length" => self.phon_length as f64,
            "orth_neighbors" => self.orth_neighbors as f64,
            "phon_neighbors" => self.phon_neighbors as f64,
            "phon_density" => self.phon_density as f64,
            "oncleus_entropy" => self.oncleus_entropy,
            "vowel_entropy" => self.vowel_entropy,
            "rime_entropy" => self.rime_entropy,
            other => return self.extra.get(other).copied(),
        })
    }
}

/// Word variables for the whole vocabulary, in vocabulary order. Neighbor
/// counts and entropies are taken over the whole vocabulary.
pub fn word_variables(vocab: &Vocabulary) -> Result<Vec<WordVariables>> {
    let orth = orthographic_neighbor_counts(vocab);
    let phon = phonological_neighbor_counts(vocab);
    let [on, vo, ri] = Unit::ALL.map(|u| unit_entropies(vocab, u, None));
    let (on, vo, ri) = (on?, vo?, ri?);
    Ok(vocab
        .items()
        .iter()
        .enumerate()
        .map(|(i, it)| WordVariables {
            word: it.word.clone(),
            orth_length: it.word.chars().count(),
            phon_length: it.phonemes.len(),
            orth_neighbors: orth[i],
            phon_neighbors: phon[i],
            phon_density: phonological_density(it),
            oncleus_entropy: on[i],
            vowel_entropy: vo[i],
            rime_entropy: ri[i],
            extra: PASS_THROUGH
                .iter()
                .filter_map(|c| it.weight(c).map(|w| (c.to_string(), w)))
                .collect(),
        })
        .collect())
}

/// Spearman correlation of one variable with the target; `rho` and
/// `p_value` are `None` when undefined (a constant ranking).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub variable: String,
    pub n: usize,
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
}

impl CorrelationRow {
    pub fn significant(&self) -> bool {
        self.p_value.is_some_and(|p| p < ALPHA)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub rows: Vec<CorrelationRow>,
    pub notices: Vec<String>,
}

impl AnalysisReport {
    /// `variable,n,rho,p_value,significant`; undefined cells read `undefined`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variable,n,rho,p_value,significant\n");
        let cell =
            |x: Option<f64>| x.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6}"));
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.variable,
                r.n,
                cell(r.rho),
                cell(r.p_value),
                r.significant()
            );
        }
        out
    }
}

/// Correlate each word variable of the pool words with `(P_i + Q_i) / 2`.
/// `pool[i]` is the vocabulary index of the item that `P` and `Q` weight at
/// position `i`.
pub fn correlate_with_mean_pq(
    vocab: &Vocabulary,
    pool: &[usize],
    p: &Multinomial,
    q: &Multinomial,
) -> Result<AnalysisReport> {
    if p.k() != pool.len() || q.k() != pool.len() {
        return Err(Error::Shape {
            expected: pool.len(),
            actual: if p.k() != pool.len() { p.k() } else { q.k() },
        });
    }
    if let Some(&i) = pool.iter().find(|&&i| i >= vocab.len()) {
        return Err(Error::InvalidArgument(format!(
            "pool index {i} outside vocabulary"
        )));
    }
    let all = word_variables(vocab)?;
    let vars: Vec<&WordVariables> = pool.iter().map(|&i| &all[i]).collect();
    let target: Vec<f64> = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| (a + b) / 2.0)
        .collect();

    let mut report = AnalysisReport::default();
    let mut names: Vec<String> = WordVariables::CORE.iter().map(|s| s.to_string()).collect();
    for col in PASS_THROUGH {
        if vars.iter().any(|v| v.extra.contains_key(col)) {
            names.push(col.to_string());
        } else {
            report
                .notices
                .push(format!("column '{col}' not present in the pool; skipped"));
        }
    }
    for name in names {
        let (xs, ys): (Vec<f64>, Vec<f64>) = vars
            .iter()
            .zip(&target)
            .filter_map(|(v, &t)| v.get(&name).map(|x| (x, t)))
            .unzip();
        if xs.len() < vars.len() {
            report.notices.push(format!(
                "'{name}' missing for {} pool words; correlated over the rest",
                vars.len() - xs.len()
            ));
        }
        let row = match spearman_rho(&xs, &ys) {
            Ok(c) => CorrelationRow {
                variable: name,
                n: xs.len(),
                rho: Some(c.rho),
                p_value: Some(c.p_value),
            },
            Err(Error::ZeroVariance(_)) | Err(Error::InvalidArgument(_)) => {
                report
                    .notices
                    .push(format!("'{name}' correlation undefined"));
                CorrelationRow {
                    variable: name,
                    n: xs.len(),
                    rho: None,
                    p_value: None,
                }
            }
            Err(e) => return Err(e),
        };
        report.rows.push(row);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::{PhonemeInventory, WordItem};

    fn vocab(words: &[(&str, &[&str])]) -> Vocabulary {
        let inv = PhonemeInventory::builtin();
        let items = words
            .iter()
            .map(|(w, p)| {
                let p: Vec<String> = p.iter().map(|s| s.to_string()).collect();
                WordItem::new(w, p, None, BTreeMap::new(), &inv).unwrap()
            })
            .collect();
        Vocabulary::new(items, inv).unwrap()
    }

    #[test]
    fn edit_distance() {
        assert_eq!(levenshtein("cat", "cat"), 0);
        assert_eq!(levenshtein("cat", "bat"), 1);
        assert_eq!(levenshtein("brook", "book"), 1);
    }

    #[test]
    fn orth_neighbors() {
        let v = vocab(&[
            ("cat", &["k", "@", "t"]),
            ("bat", &["b", "@", "t"]),
            ("cut", &["k", "^", "t"]),
            ("dog", &["d", "O", "g"]),
        ]);
        assert_eq!(orthographic_neighbors(&v, "cat").unwrap(), 2);
        assert_eq!(orthographic_neighbors(&v, "dog").unwrap(), 0);
        assert_eq!(orthographic_neighbor_counts(&v), vec![2, 1, 1, 0]);
        assert!(orthographic_neighbors(&v, "cow").is_err());
        let one = vocab(&[("cat", &["k", "@", "t"])]);
        assert_eq!(orthographic_neighbors(&one, "cat").unwrap(), 0);
    }

    #[test]
    fn phon_neighbors_need_body_and_rime() {
        let v = vocab(&[
            ("hushed", &["h", "^", "S", "t"]),
            ("rushed", &["r", "^", "S", "t"]),
            ("pushed", &["p", "U", "S", "t"]),
            ("dog", &["d", "O", "g"]),
        ]);
        assert_eq!(phonological_neighbors(&v, "hushed").unwrap(), 1);
        assert_eq!(phonological_neighbors(&v, "pushed").unwrap(), 0);
        assert_eq!(phonological_neighbors(&v, "dog").unwrap(), 0);
        assert_eq!(phonological_neighbor_counts(&v), vec![1, 1, 0, 0]);
    }

    #[test]
    fn density_is_popcount() {
        let v = vocab(&[("cat", &["k", "@", "t"])]);
        let it = v.item(0);
        let inv = v.inventory();
        let per: usize = ["k", "@", "t"]
            .iter()
            .map(|c| {
                inv.lookup(c)
                    .unwrap()
                    .features
                    .iter()
                    .filter(|&&b| b == 1)
                    .count()
            })
            .sum();
        assert_eq!(phonological_density(it), per);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy_bits(&[3.0]), 0.0);
        assert!((entropy_bits(&[1.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!((entropy_bits(&[3.0, 1.0]) - 0.811_278_124_459_132_8).abs() < 1e-12);
        let v = vocab(&[
            ("hint", &["h", "I", "n", "t"]),
            ("mint", &["m", "I", "n", "t"]),
            ("lint", &["l", "I", "n", "t"]),
            ("pint", &["p", "Y", "n", "t"]),
            ("dog", &["d", "O", "g"]),
        ]);
        let rime = unit_entropy(&v, Unit::Rime, None).unwrap();
        assert!((rime["hint"] - 0.811_278_124_459_132_8).abs() < 1e-12);
        assert_eq!(rime["dog"], 0.0);
        let vowel = unit_entropy(&v, Unit::Vowel, None).unwrap();
        assert!((vowel["pint"] - 0.811_278_124_459_132_8).abs() < 1e-12);
        let onc = unit_entropy(&v, Unit::Oncleus, None).unwrap();
        assert!(onc.values().all(|&h| h == 0.0));
        assert!(matches!(
            unit_entropy(&v, Unit::Rime, Some("freq")),
            Err(Error::MissingColumn { .. })
        ));
    }

    #[test]
    fn uniform_target_is_undefined() {
        let v = vocab(&[
            ("cat", &["k", "@", "t"]),
            ("bat", &["b", "@", "t"]),
            ("cut", &["k", "^", "t"]),
            ("dog", &["d", "O", "g"]),
        ]);
        let u = Multinomial::uniform(4);
        let r = correlate_with_mean_pq(&v, &[0, 1, 2, 3], &u, &u).unwrap();
        assert_eq!(r.rows.len(), WordVariables::CORE.len());
        assert!(r.rows.iter().all(|row| row.rho.is_none()));
        assert!(r
            .to_csv()
            .contains("orth_length,4,undefined,undefined,false"));
        assert!(correlate_with_mean_pq(&v, &[0, 1], &u, &u).is_err());
    }
}
