//! Lexicon ingestion, alignment, encoding and pool/test splits.
//!
//! Vocabulary files are UTF-8 TSV with a header row. `word` and `phonemes`
//! (space-separated codes) are required; `onset`, `vowel` and `coda` give an
//! explicit segmentation when `vowel` is non-blank; every other column is a
//! nonnegative prevalence weight (blank = absent). Lines starting with `#`
//! are ignored.

mod align;
mod encode;
mod inventory;
mod synthetic;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::seq::index;
use serde::{Deserialize, Serialize};

pub use align::{
    align_word, segment, Alignment, Segmentation, MAX_CODA_LETTERS, MAX_CODA_PHONEMES,
    MAX_ONSET_LETTERS, MAX_ONSET_PHONEMES, MAX_VOWEL_LETTERS, ORTH_SLOTS, PAD_CHAR, PHON_SLOTS,
};
pub use encode::{
    decode_orthography, encode_orthography, encode_phonology, ALPHABET, INPUT_DIM, OUTPUT_DIM,
};
pub use inventory::{Phoneme, PhonemeInventory, FEATURES, PAD};
pub use synthetic::{generate_synthetic_vocabulary, SyntheticSpec, SyntheticVocabulary};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordItem {
    pub word: String,
    pub segmentation: Segmentation,
    /// Unaligned phoneme codes.
    pub phonemes: Vec<String>,
    /// Index of the vowel within `phonemes`.
    pub vowel_phoneme: usize,
    pub aligned_orth: String,
    pub aligned_phon: Vec<String>,
    /// Orthographic input, 260 binary entries.
    pub o: Vec<f64>,
    /// Phonological target, 200 binary entries.
    pub y: Vec<f64>,
    pub weights: BTreeMap<String, f64>,
}

impl WordItem {
    pub fn new(
        word: &str,
        phonemes: Vec<String>,
        segmentation: Option<&Segmentation>,
        weights: BTreeMap<String, f64>,
        inventory: &PhonemeInventory,
    ) -> Result<Self> {
        let a = align_word(word, &phonemes, segmentation, inventory)?;
        let o = encode_orthography(&a.orth)?;
        let y = encode_phonology(&a.phon, inventory)?;
        Ok(Self {
            word: word.to_string(),
            segmentation: a.segmentation,
            phonemes,
            vowel_phoneme: a.vowel_phoneme,
            aligned_orth: a.orth,
            aligned_phon: a.phon,
            o,
            y,
            weights,
        })
    }

    pub fn onset_phonemes(&self) -> &[String] {
        &self.phonemes[..self.vowel_phoneme]
    }

    pub fn vowel_code(&self) -> &str {
        &self.phonemes[self.vowel_phoneme]
    }

    pub fn coda_phonemes(&self) -> &[String] {
        &self.phonemes[self.vowel_phoneme + 1..]
    }

    /// Vowel phoneme plus coda phonemes.
    pub fn rime(&self) -> &[String] {
        &self.phonemes[self.vowel_phoneme..]
    }

    pub fn weight(&self, column: &str) -> Option<f64> {
        self.weights.get(column).copied()
    }
}

#[derive(Clone, Debug)]
pub struct Vocabulary {
    items: Vec<WordItem>,
    inventory: PhonemeInventory,
    by_word: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(items: Vec<WordItem>, inventory: PhonemeInventory) -> Result<Self> {
        let mut by_word = HashMap::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            if by_word.insert(item.word.clone(), i).is_some() {
                return Err(Error::Duplicate {
                    what: "word",
                    key: item.word.clone(),
                });
            }
            for code in &item.aligned_phon {
                inventory.lookup(code)?;
            }
        }
        Ok(Self {
            items,
            inventory,
            by_word,
        })
    }

    pub fn items(&self) -> &[WordItem] {
        &self.items
    }

    pub fn item(&self, i: usize) -> &WordItem {
        &self.items[i]
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn inventory(&self) -> &PhonemeInventory {
        &self.inventory
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.by_word.get(word).copied()
    }

    pub fn find(&self, word: &str) -> Result<&WordItem> {
        self.index_of(word)
            .map(|i| &self.items[i])
            .ok_or_else(|| Error::UnknownWord(word.to_string()))
    }

    /// Names of weight columns present on at least one item, sorted.
    pub fn weight_columns(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.items.iter().flat_map(|it| it.weights.keys()).collect();
        set.into_iter().cloned().collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Vec<&WordItem> {
        indices.iter().map(|&i| &self.items[i]).collect()
    }

    /// Serialize to the TSV format accepted by [`parse_vocabulary`], with an
    /// explicit segmentation for every row.
    pub fn to_tsv(&self) -> String {
        let columns = self.weight_columns();
        let mut out = String::from("word\tonset\tvowel\tcoda\tphonemes");
        for c in &columns {
            out.push('\t');
            out.push_str(c);
        }
        out.push('\n');
        for item in &self.items {
            let s = &item.segmentation;
            let _ = write!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                item.word,
                s.onset,
                s.vowel,
                s.coda,
                item.phonemes.join(" ")
            );
            for c in &columns {
                out.push('\t');
                if let Some(w) = item.weights.get(c) {
                    let _ = write!(out, "{w}");
                }
            }
            out.push('\n');
        }
        out
    }
}

struct Header {
    word: usize,
    phonemes: usize,
    onset: Option<usize>,
    vowel: Option<usize>,
    coda: Option<usize>,
    weights: Vec<(usize, String)>,
}

fn parse_header(line: &str, lineno: usize) -> Result<Header> {
    let names: Vec<&str> = line.split('\t').map(str::trim).collect();
    let find = |name: &str| names.iter().position(|&n| n == name);
    let word = find("word").ok_or_else(|| Error::Parse {
        line: lineno,
        message: "header lacks a 'word' column".into(),
    })?;
    let phonemes = find("phonemes").ok_or_else(|| Error::Parse {
        line: lineno,
        message: "header lacks a 'phonemes' column".into(),
    })?;
    let reserved = ["word", "phonemes", "onset", "vowel", "coda"];
    let mut seen = BTreeSet::new();
    for n in &names {
        if !seen.insert(*n) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("duplicate column '{n}'"),
            });
        }
    }
    Ok(Header {
        word,
        phonemes,
        onset: find("onset"),
        vowel: find("vowel"),
        coda: find("coda"),
        weights: names
            .iter()
            .enumerate()
            .filter(|(_, n)| !reserved.contains(n) && !n.is_empty())
            .map(|(i, n)| (i, n.to_string()))
            .collect(),
    })
}

fn parse_row(
    header: &Header,
    fields: &[&str],
    lineno: usize,
    inventory: &PhonemeInventory,
) -> Result<WordItem> {
    let get = |i: usize| fields.get(i).map(|s| s.trim()).unwrap_or("");
    let word = get(header.word);
    let row_err = |message: String| Error::Row {
        row: lineno,
        word: word.to_string(),
        message,
    };
    if word.is_empty() {
        return Err(row_err("empty word".into()));
    }
    let phonemes: Vec<String> = get(header.phonemes)
        .split_whitespace()
        .map(String::from)
        .collect();
    let segmentation = match header.vowel.map(get) {
        Some(v) if !v.is_empty() => Some(Segmentation::new(
            header.onset.map(get).unwrap_or(""),
            v,
            header.coda.map(get).unwrap_or(""),
        )),
        _ => None,
    };
    let mut weights = BTreeMap::new();
    for (i, name) in &header.weights {
        let raw = get(*i);
        if raw.is_empty() {
            continue;
        }
        let w: f64 = raw
            .parse()
            .map_err(|_| row_err(format!("column '{name}': '{raw}' is not a number")))?;
        if !w.is_finite() || w < 0.0 {
            return Err(row_err(format!(
                "column '{name}': weight must be finite and >= 0"
            )));
        }
        weights.insert(name.clone(), w);
    }
    WordItem::new(word, phonemes, segmentation.as_ref(), weights, inventory)
        .map_err(|e| row_err(e.to_string()))
}

/// Outcome of a lenient parse: the valid rows plus one error per rejected row.
pub struct ParsedVocabulary {
    pub vocabulary: Vocabulary,
    pub rejected: Vec<Error>,
}

/// Parse a vocabulary, keeping valid rows and collecting per-row errors
/// (e.g. words without an orthographic vowel). Header and duplicate-word
/// problems are still fatal.
pub fn parse_vocabulary_lenient(
    text: &str,
    inventory: &PhonemeInventory,
) -> Result<ParsedVocabulary> {
    let mut header = None;
    let mut items = Vec::new();
    let mut rejected = Vec::new();
    let mut seen = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let Some(h) = &header else {
            header = Some(parse_header(raw, lineno)?);
            continue;
        };
        let fields: Vec<&str> = raw.split('\t').collect();
        match parse_row(h, &fields, lineno, inventory) {
            Ok(item) => {
                if let Some(first) = seen.insert(item.word.clone(), lineno) {
                    return Err(Error::Row {
                        row: lineno,
                        word: item.word,
                        message: format!("duplicate of row {first}"),
                    });
                }
                items.push(item);
            }
            Err(e) => rejected.push(e),
        }
    }
    if header.is_none() {
        return Err(Error::Parse {
            line: 0,
            message: "missing header row".into(),
        });
    }
    Ok(ParsedVocabulary {
        vocabulary: Vocabulary::new(items, inventory.clone())?,
        rejected,
    })
}

/// Strict parse: the first invalid row is an error.
pub fn parse_vocabulary(text: &str, inventory: &PhonemeInventory) -> Result<Vocabulary> {
    let mut parsed = parse_vocabulary_lenient(text, inventory)?;
    if parsed.rejected.is_empty() {
        Ok(parsed.vocabulary)
    } else {
        Err(parsed.rejected.swap_remove(0))
    }
}

/// Training pool `U` and test set `E = V - U`, both as ascending indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolSplit {
    pub pool: Vec<usize>,
    pub test: Vec<usize>,
}

impl PoolSplit {
    pub fn k(&self) -> usize {
        self.pool.len()
    }

    /// Validate a split loaded from elsewhere against a vocabulary size.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &i in self.pool.iter().chain(&self.test) {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument(format!(
                    "split index {i} out of range or repeated"
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArgument(
                "split does not cover the vocabulary".into(),
            ));
        }
        Ok(())
    }
}

/// Uniformly random `k`-subset of `0..n` as the pool; deterministic in `seed`.
pub fn split_vocabulary(n: usize, k: usize, seed: u64) -> Result<PoolSplit> {
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "pool size {k} must satisfy 0 < K < {n}"
        )));
    }
    let mut rng = rng::rng_from_seed(seed);
    let mut pool = index::sample(&mut rng, n, k).into_vec();
    pool.sort_unstable();
    let mut in_pool = vec![false; n];
    for &i in &pool {
        in_pool[i] = true;
    }
    let test = (0..n).filter(|&i| !in_pool[i]).collect();
    Ok(PoolSplit { pool, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# tiny lexicon
word\tonset\tvowel\tcoda\tphonemes\tchild_freq\taoa
coals\t\t\t\tk o l z\t12\t4.5
cat\tc\ta\tt\tk @ t\t30\t
hmm\t\t\t\th m\t2\t3
";

    #[test]
    fn lenient_parse_rejects_vowelless_rows() {
        let inv = PhonemeInventory::builtin();
        let parsed = parse_vocabulary_lenient(SAMPLE, &inv).unwrap();
        assert_eq!(parsed.vocabulary.len(), 2);
        assert_eq!(parsed.rejected.len(), 1);
        match &parsed.rejected[0] {
            Error::Row { row, word, .. } => {
                assert_eq!(*row, 5);
                assert_eq!(word, "hmm");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_vocabulary(SAMPLE, &inv).is_err());

        let v = &parsed.vocabulary;
        let cat = v.find("cat").unwrap();
        assert_eq!(cat.aligned_orth, "__ca_t____");
        assert_eq!(cat.weight("child_freq"), Some(30.0));
        assert_eq!(cat.weight("aoa"), None);
        assert_eq!(v.weight_columns(), vec!["aoa", "child_freq"]);
    }

    #[test]
    fn empty_body_is_valid() {
        let inv = PhonemeInventory::builtin();
        let v = parse_vocabulary("word\tphonemes\n", &inv).unwrap();
        assert!(v.is_empty());
        assert!(parse_vocabulary("", &inv).is_err());
    }

    #[test]
    fn duplicates_and_bad_weights() {
        let inv = PhonemeInventory::builtin();
        let dup = "word\tphonemes\ncat\tk @ t\ncat\tk @ t\n";
        assert!(parse_vocabulary(dup, &inv).is_err());
        let neg = "word\tphonemes\tf\ncat\tk @ t\t-1\n";
        assert!(parse_vocabulary(neg, &inv).is_err());
        let unknown = "word\tphonemes\ncat\tk @ q\n";
        assert!(parse_vocabulary(unknown, &inv).is_err());
    }

    #[test]
    fn tsv_round_trip() {
        let inv = PhonemeInventory::builtin();
        let v = parse_vocabulary_lenient(SAMPLE, &inv).unwrap().vocabulary;
        let again = parse_vocabulary(&v.to_tsv(), &inv).unwrap();
        assert_eq!(v.items(), again.items());
    }

    #[test]
    fn split_sizes_and_determinism() {
        let s = split_vocabulary(2869, 200, 42).unwrap();
        assert_eq!(s.pool.len(), 200);
        assert_eq!(s.test.len(), 2669);
        s.validate(2869).unwrap();
        assert_eq!(s, split_vocabulary(2869, 200, 42).unwrap());
        assert_ne!(s, split_vocabulary(2869, 200, 43).unwrap());
        assert_eq!(split_vocabulary(10, 9, 1).unwrap().test.len(), 1);
        assert!(split_vocabulary(10, 10, 1).is_err());
        assert!(split_vocabulary(10, 0, 1).is_err());
    }
}
