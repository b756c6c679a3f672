//! Slot alignment of spellings and pronunciations.
//!
//! Orthography uses 10 slots: onset letters right-aligned into slots 1-3,
//! the vowel grapheme in slots 4-5, coda letters left-aligned from slot 6.
//! Phonology uses 8 slots: onset phonemes in 1-3, the vowel in 4, coda in 5-8.

use serde::{Deserialize, Serialize};

use super::inventory::{PhonemeInventory, PAD};
use crate::error::{Error, Result};

pub const ORTH_SLOTS: usize = 10;
pub const PHON_SLOTS: usize = 8;
pub const MAX_ONSET_LETTERS: usize = 3;
pub const MAX_VOWEL_LETTERS: usize = 2;
pub const MAX_CODA_LETTERS: usize = 5;
pub const MAX_ONSET_PHONEMES: usize = 3;
pub const MAX_CODA_PHONEMES: usize = 4;
pub const PAD_CHAR: char = '_';

/// Onset / vowel grapheme / coda split of a spelling.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segmentation {
    pub onset: String,
    pub vowel: String,
    pub coda: String,
}

impl Segmentation {
    pub fn new(onset: &str, vowel: &str, coda: &str) -> Self {
        Self {
            onset: onset.to_string(),
            vowel: vowel.to_string(),
            coda: coda.to_string(),
        }
    }

    pub fn spelling(&self) -> String {
        format!("{}{}{}", self.onset, self.vowel, self.coda)
    }

    /// Vowel grapheme plus coda ("ushed" in "hushed").
    pub fn body(&self) -> String {
        format!("{}{}", self.vowel, self.coda)
    }

    /// Onset plus vowel grapheme ("broo" in "brook").
    pub fn oncleus(&self) -> String {
        format!("{}{}", self.onset, self.vowel)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub segmentation: Segmentation,
    /// Exactly [`ORTH_SLOTS`] characters, `_` for padding.
    pub orth: String,
    /// Exactly [`PHON_SLOTS`] phoneme codes, `_` for padding.
    pub phon: Vec<String>,
    /// Position of the vowel within the unaligned phoneme list.
    pub vowel_phoneme: usize,
}

fn is_core_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Heuristic onset/vowel/coda split.
///
/// The vowel letters are a, e, i, o, u; `y` counts as a vowel only when it is
/// not word-initial and no other vowel letter precedes it ("gym", "rhythm").
/// The vowel grapheme is the run of vowel letters starting at the first
/// vowel, truncated to two letters.
pub fn segment(spelling: &str) -> Result<Segmentation> {
    let chars: Vec<char> = spelling.chars().collect();
    let first = chars
        .iter()
        .enumerate()
        .position(|(i, &c)| is_core_vowel(c) || (c == 'y' && i > 0))
        .ok_or_else(|| Error::Alignment {
            word: spelling.to_string(),
            reason: "no orthographic vowel".into(),
        })?;
    let mut end = first + 1;
    if chars[first] != 'y' {
        while end < chars.len() && end - first < MAX_VOWEL_LETTERS && is_core_vowel(chars[end]) {
            end += 1;
        }
    }
    Ok(Segmentation {
        onset: chars[..first].iter().collect(),
        vowel: chars[first..end].iter().collect(),
        coda: chars[end..].iter().collect(),
    })
}

/// Align a spelling and its phonemes into fixed slots.
///
/// `segmentation`, when given, overrides the heuristic and must concatenate
/// to `spelling`.
pub fn align_word(
    spelling: &str,
    phonemes: &[String],
    segmentation: Option<&Segmentation>,
    inventory: &PhonemeInventory,
) -> Result<Alignment> {
    let fail = |reason: String| Error::Alignment {
        word: spelling.to_string(),
        reason,
    };
    if spelling.chars().count() < 2 {
        return Err(fail("spelling shorter than two letters".into()));
    }
    if let Some(c) = spelling.chars().find(|c| !c.is_ascii_lowercase()) {
        return Err(fail(format!("letter '{c}' outside a-z")));
    }
    let seg = match segmentation {
        Some(seg) => {
            if seg.spelling() != spelling {
                return Err(fail(format!(
                    "segmentation '{}|{}|{}' does not spell the word",
                    seg.onset, seg.vowel, seg.coda
                )));
            }
            if seg.vowel.is_empty() {
                return Err(fail("empty vowel segment".into()));
            }
            seg.clone()
        }
        None => segment(spelling)?,
    };
    if !seg
        .vowel
        .starts_with(|c: char| is_core_vowel(c) || c == 'y')
    {
        return Err(fail("vowel segment must start with a vowel letter".into()));
    }
    if seg.onset.len() > MAX_ONSET_LETTERS {
        return Err(fail(format!(
            "onset '{}' exceeds {MAX_ONSET_LETTERS} letters",
            seg.onset
        )));
    }
    if seg.vowel.len() > MAX_VOWEL_LETTERS {
        return Err(fail(format!(
            "vowel '{}' exceeds {MAX_VOWEL_LETTERS} letters",
            seg.vowel
        )));
    }
    if seg.coda.len() > MAX_CODA_LETTERS {
        return Err(fail(format!(
            "coda '{}' exceeds {MAX_CODA_LETTERS} letters",
            seg.coda
        )));
    }

    let mut orth = vec![PAD_CHAR; ORTH_SLOTS];
    let onset_start = MAX_ONSET_LETTERS - seg.onset.len();
    for (i, c) in seg.onset.chars().enumerate() {
        orth[onset_start + i] = c;
    }
    for (i, c) in seg.vowel.chars().enumerate() {
        orth[MAX_ONSET_LETTERS + i] = c;
    }
    for (i, c) in seg.coda.chars().enumerate() {
        orth[MAX_ONSET_LETTERS + MAX_VOWEL_LETTERS + i] = c;
    }

    let mut vowel_at = None;
    for (i, code) in phonemes.iter().enumerate() {
        if code == PAD {
            return Err(fail("padding code inside phoneme list".into()));
        }
        if inventory.is_vocalic(code)? {
            if vowel_at.is_some() {
                return Err(fail("more than one vowel phoneme".into()));
            }
            vowel_at = Some(i);
        }
    }
    let v = vowel_at.ok_or_else(|| fail("no vowel phoneme".into()))?;
    let coda_len = phonemes.len() - v - 1;
    if v > MAX_ONSET_PHONEMES {
        return Err(fail(format!(
            "{v} onset phonemes exceed {MAX_ONSET_PHONEMES}"
        )));
    }
    if coda_len > MAX_CODA_PHONEMES {
        return Err(fail(format!(
            "{coda_len} coda phonemes exceed {MAX_CODA_PHONEMES}"
        )));
    }
    let mut phon = vec![PAD.to_string(); PHON_SLOTS];
    for (i, code) in phonemes.iter().enumerate() {
        let slot = MAX_ONSET_PHONEMES + i - v;
        phon[slot] = code.clone();
    }

    Ok(Alignment {
        segmentation: seg,
        orth: orth.into_iter().collect(),
        phon,
        vowel_phoneme: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codes(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn coals() {
        let inv = PhonemeInventory::builtin();
        let a = align_word("coals", &codes("k o l z"), None, &inv).unwrap();
        assert_eq!(a.orth, "__coals___");
        assert_eq!(a.phon.concat(), "__kolz__");
        assert_eq!(a.segmentation, Segmentation::new("c", "oa", "ls"));
    }

    #[test]
    fn cat_keeps_fifth_slot_for_vowel() {
        let inv = PhonemeInventory::builtin();
        let a = align_word("cat", &codes("k @ t"), None, &inv).unwrap();
        assert_eq!(a.orth, "__ca_t____");
        assert_eq!(a.phon.concat(), "__k@t___");
    }

    #[test]
    fn coda_capacity() {
        let inv = PhonemeInventory::builtin();
        let a = align_word("strengths", &codes("s t r E N T s"), None, &inv).unwrap();
        assert_eq!(a.orth, "stre_ngths");
        assert_eq!(a.phon.concat(), "strENTs_");
        let err = align_word("tangthsx", &codes("t @ N"), None, &inv).unwrap_err();
        assert!(err.to_string().contains("coda"), "{err}");
    }

    #[test]
    fn no_vowel_rejected() {
        let inv = PhonemeInventory::builtin();
        assert!(align_word("hmm", &codes("h m"), None, &inv).is_err());
        assert!(segment("hmm").is_err());
    }

    #[test]
    fn y_rule() {
        assert_eq!(segment("gym").unwrap(), Segmentation::new("g", "y", "m"));
        assert_eq!(segment("day").unwrap(), Segmentation::new("d", "a", "y"));
        assert_eq!(segment("yes").unwrap(), Segmentation::new("y", "e", "s"));
        assert_eq!(
            segment("queue").unwrap(),
            Segmentation::new("q", "ue", "ue")
        );
    }

    #[test]
    fn explicit_segmentation_overrides_heuristic() {
        let inv = PhonemeInventory::builtin();
        let seg = Segmentation::new("qu", "ee", "n");
        let a = align_word("queen", &codes("k w i n"), Some(&seg), &inv).unwrap();
        assert_eq!(a.orth, "_queen____");
        assert_eq!(a.phon.concat(), "_kwin___");
        let wrong = Segmentation::new("q", "ee", "n");
        assert!(align_word("queen", &codes("k w i n"), Some(&wrong), &inv).is_err());
    }

    #[test]
    fn phoneme_constraints() {
        let inv = PhonemeInventory::builtin();
        assert!(align_word("cat", &codes("k t"), None, &inv).is_err());
        assert!(align_word("cat", &codes("k @ i t"), None, &inv).is_err());
        assert!(align_word("cat", &codes("k @ q"), None, &inv).is_err());
        assert!(align_word("cat", &codes("s t r k @ t"), None, &inv).is_err());
    }
}
