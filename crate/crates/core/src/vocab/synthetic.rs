//! Quasiregular synthetic lexicons for desk-scale experiments.
//!
//! Words are CVC, CCVC or CVCC strings over a consonant-letter set and a
//! vowel-grapheme set. Every grapheme has one canonical phoneme; a fixed
//! fraction of words (the exceptions) get a different vowel phoneme, which
//! makes the spelling-to-sound mapping mostly but not entirely regular.

use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rand::RngExt;
use serde::{Deserialize, Serialize};

use super::{PhonemeInventory, Segmentation, Vocabulary, WordItem};
use crate::error::{Error, Result};
use crate::rng::{self, domain};

const CONSONANTS: &[(&str, &str)] = &[
    ("t", "t"),
    ("n", "n"),
    ("s", "s"),
    ("r", "r"),
    ("l", "l"),
    ("d", "d"),
    ("m", "m"),
    ("p", "p"),
    ("b", "b"),
    ("k", "k"),
    ("g", "g"),
    ("f", "f"),
    ("v", "v"),
    ("z", "z"),
    ("h", "h"),
    ("w", "w"),
    ("j", "J"),
];

const VOWELS: &[(&str, &str)] = &[
    ("a", "@"),
    ("e", "E"),
    ("i", "I"),
    ("o", "a"),
    ("u", "^"),
    ("ee", "i"),
    ("oa", "o"),
    ("ai", "e"),
    ("oo", "u"),
    ("ou", "W"),
    ("oi", "A"),
    ("ie", "Y"),
    ("au", "O"),
    ("ue", "U"),
];

/// Name of the Zipf-distributed frequency column.
pub const FREQ_COLUMN: &str = "freq";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_words: usize,
    pub n_consonants: usize,
    pub n_vowel_graphemes: usize,
    pub exception_rate: f64,
    pub zipf_exponent: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_words: 300,
            n_consonants: 10,
            n_vowel_graphemes: 8,
            exception_rate: 0.2,
            zipf_exponent: 1.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_words == 0 {
            return bad("n_words must be positive".into());
        }
        if !(1..=CONSONANTS.len()).contains(&self.n_consonants) {
            return bad(format!("n_consonants must be in 1..={}", CONSONANTS.len()));
        }
        if !(1..=VOWELS.len()).contains(&self.n_vowel_graphemes) {
            return bad(format!("n_vowel_graphemes must be in 1..={}", VOWELS.len()));
        }
        if !(0.0..=1.0).contains(&self.exception_rate) {
            return bad("exception_rate must lie in [0, 1]".into());
        }
        if !self.zipf_exponent.is_finite() || self.zipf_exponent < 0.0 {
            return bad("zipf_exponent must be finite and >= 0".into());
        }
        if self.exception_count() > 0 && self.n_vowel_graphemes < 2 {
            return bad("exceptions need at least two vowel graphemes".into());
        }
        let cap = self.capacity();
        if self.n_words > cap {
            return bad(format!(
                "{} words requested but only {cap} distinct words are possible",
                self.n_words
            ));
        }
        Ok(())
    }

    /// Number of distinct words the letter sets can form.
    pub fn capacity(&self) -> usize {
        let c = self.n_consonants;
        let v = self.n_vowel_graphemes;
        c * v * c + 2 * c * c.saturating_sub(1) * v * c
    }

    pub fn exception_count(&self) -> usize {
        (self.exception_rate * self.n_words as f64).round() as usize
    }
}

/// A generated lexicon plus the ground truth used to build it.
#[derive(Clone, Debug)]
pub struct SyntheticVocabulary {
    pub vocabulary: Vocabulary,
    /// Indices of words whose vowel deviates from the grapheme table.
    pub exceptions: Vec<usize>,
    /// Canonical grapheme -> phoneme table (consonants then vowels).
    pub table: BTreeMap<String, String>,
}

/// Generate a quasiregular lexicon over the built-in phoneme inventory.
pub fn generate_synthetic_vocabulary(
    spec: &SyntheticSpec,
    seed: u64,
) -> Result<SyntheticVocabulary> {
    spec.validate()?;
    let inventory = PhonemeInventory::builtin();
    let cons = &CONSONANTS[..spec.n_consonants];
    let vows = &VOWELS[..spec.n_vowel_graphemes];

    // Candidate enumeration in a fixed order: CVC, CCVC, CVCC.
    let mut candidates: Vec<(Vec<usize>, usize, Vec<usize>)> = Vec::with_capacity(spec.capacity());
    for v in 0..vows.len() {
        for a in 0..cons.len() {
            for b in 0..cons.len() {
                candidates.push((vec![a], v, vec![b]));
            }
        }
    }
    for v in 0..vows.len() {
        for a in 0..cons.len() {
            for a2 in (0..cons.len()).filter(|&x| x != a) {
                for b in 0..cons.len() {
                    candidates.push((vec![a, a2], v, vec![b]));
                    candidates.push((vec![b], v, vec![a, a2]));
                }
            }
        }
    }

    let mut rng = rng::rng_from_seed(rng::mix(seed, &[domain::SYNTHETIC]));
    let mut chosen = index::sample(&mut rng, candidates.len(), spec.n_words).into_vec();
    chosen.sort_unstable();

    let n_exc = spec.exception_count();
    let mut exceptions = index::sample(&mut rng, spec.n_words, n_exc).into_vec();
    exceptions.sort_unstable();
    let mut is_exception = vec![false; spec.n_words];
    for &e in &exceptions {
        is_exception[e] = true;
    }

    let mut ranks: Vec<usize> = (1..=spec.n_words).collect();
    ranks.shuffle(&mut rng);

    let mut items = Vec::with_capacity(spec.n_words);
    for (w, &ci) in chosen.iter().enumerate() {
        let (onset, v, coda) = &candidates[ci];
        let seg = Segmentation {
            onset: onset.iter().map(|&i| cons[i].0).collect(),
            vowel: vows[*v].0.to_string(),
            coda: coda.iter().map(|&i| cons[i].0).collect(),
        };
        let mut vowel_phoneme = vows[*v].1;
        if is_exception[w] {
            let shift = rng.random_range(1..vows.len());
            vowel_phoneme = vows[(*v + shift) % vows.len()].1;
        }
        let mut phonemes: Vec<String> = onset.iter().map(|&i| cons[i].1.to_string()).collect();
        phonemes.push(vowel_phoneme.to_string());
        phonemes.extend(coda.iter().map(|&i| cons[i].1.to_string()));

        let freq = 1.0e6 / (ranks[w] as f64).powf(spec.zipf_exponent);
        let weights = BTreeMap::from([(FREQ_COLUMN.to_string(), freq)]);
        items.push(WordItem::new(
            &seg.spelling(),
            phonemes,
            Some(&seg),
            weights,
            &inventory,
        )?);
    }

    let table = cons
        .iter()
        .chain(vows.iter())
        .map(|&(g, p)| (g.to_string(), p.to_string()))
        .collect();
    Ok(SyntheticVocabulary {
        vocabulary: Vocabulary::new(items, inventory)?,
        exceptions,
        table,
    })
}
