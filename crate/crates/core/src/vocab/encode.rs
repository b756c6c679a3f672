//! Binary input/target vectors.

use super::align::{ORTH_SLOTS, PAD_CHAR, PHON_SLOTS};
use super::inventory::{PhonemeInventory, FEATURES};
use crate::error::{Error, Result};

pub const ALPHABET: usize = 26;
/// Width of the orthographic input vector.
pub const INPUT_DIM: usize = ORTH_SLOTS * ALPHABET;
/// Width of the phonological target vector.
pub const OUTPUT_DIM: usize = PHON_SLOTS * FEATURES;

/// One-hot per letter slot: bit `slot * 26 + rank(letter)` (0-based slot and
/// rank, `a` = 0). Pad slots contribute nothing.
pub fn encode_orthography(aligned: &str) -> Result<Vec<f64>> {
    let chars: Vec<char> = aligned.chars().collect();
    if chars.len() != ORTH_SLOTS {
        return Err(Error::Shape {
            expected: ORTH_SLOTS,
            actual: chars.len(),
        });
    }
    let mut o = vec![0.0; INPUT_DIM];
    for (slot, &c) in chars.iter().enumerate() {
        match c {
            PAD_CHAR => {}
            'a'..='z' => o[slot * ALPHABET + (c as usize - 'a' as usize)] = 1.0,
            other => return Err(Error::InvalidLetter(other)),
        }
    }
    Ok(o)
}

/// Inverse of [`encode_orthography`] for well-formed vectors.
pub fn decode_orthography(o: &[f64]) -> Result<String> {
    if o.len() != INPUT_DIM {
        return Err(Error::Shape {
            expected: INPUT_DIM,
            actual: o.len(),
        });
    }
    let mut out = String::with_capacity(ORTH_SLOTS);
    for block in o.chunks_exact(ALPHABET) {
        let set: Vec<usize> = (0..ALPHABET).filter(|&i| block[i] != 0.0).collect();
        match set.as_slice() {
            [] => out.push(PAD_CHAR),
            [rank] => out.push((b'a' + *rank as u8) as char),
            _ => {
                return Err(Error::InvalidArgument(
                    "more than one letter set in an orthographic slot".into(),
                ))
            }
        }
    }
    Ok(out)
}

/// Concatenate the feature vectors of the eight aligned phoneme codes.
pub fn encode_phonology<S: AsRef<str>>(
    aligned: &[S],
    inventory: &PhonemeInventory,
) -> Result<Vec<f64>> {
    if aligned.len() != PHON_SLOTS {
        return Err(Error::Shape {
            expected: PHON_SLOTS,
            actual: aligned.len(),
        });
    }
    let mut y = Vec::with_capacity(OUTPUT_DIM);
    for code in aligned {
        let p = inventory.lookup(code.as_ref())?;
        y.extend(p.features.iter().map(|&b| f64::from(b)));
    }
    Ok(y)
}
