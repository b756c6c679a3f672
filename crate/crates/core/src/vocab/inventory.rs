use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of articulatory features per phoneme.
pub const FEATURES: usize = 25;

/// Code of the padding phoneme.
pub const PAD: &str = "_";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phoneme {
    pub code: String,
    pub features: [u8; FEATURES],
    pub vocalic: bool,
}

/// The set of phonemes a learner can output, padding included.
///
/// The padding phoneme always sits at index 0 so that it wins nearest-match
/// ties during decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhonemeInventory {
    entries: Vec<Phoneme>,
    index: HashMap<String, usize>,
}

impl PhonemeInventory {
    /// Build an inventory from entries, inserting the padding phoneme at the
    /// front (or moving it there) and validating the invariants.
    pub fn new(entries: Vec<Phoneme>) -> Result<Self> {
        let mut ordered = Vec::with_capacity(entries.len() + 1);
        let mut pad = None;
        for entry in entries {
            if entry.code == PAD {
                if entry.features.iter().any(|&b| b != 0) || entry.vocalic {
                    return Err(Error::InvalidArgument(
                        "padding phoneme '_' must have all-zero features".into(),
                    ));
                }
                if pad.is_some() {
                    return Err(Error::Duplicate {
                        what: "phoneme code",
                        key: PAD.into(),
                    });
                }
                pad = Some(entry);
            } else {
                ordered.push(entry);
            }
        }
        ordered.insert(
            0,
            pad.unwrap_or(Phoneme {
                code: PAD.into(),
                features: [0; FEATURES],
                vocalic: false,
            }),
        );

        let mut index = HashMap::with_capacity(ordered.len());
        let mut seen_features = HashMap::with_capacity(ordered.len());
        for (i, p) in ordered.iter().enumerate() {
            if p.code.is_empty() || p.code.chars().any(char::is_whitespace) {
                return Err(Error::InvalidArgument(format!(
                    "invalid phoneme code '{}'",
                    p.code
                )));
            }
            if index.insert(p.code.clone(), i).is_some() {
                return Err(Error::Duplicate {
                    what: "phoneme code",
                    key: p.code.clone(),
                });
            }
            if let Some(other) = seen_features.insert(p.features, i) {
                return Err(Error::Duplicate {
                    what: "feature vector",
                    key: format!("{} / {}", ordered[other].code, p.code),
                });
            }
        }
        Ok(Self {
            entries: ordered,
            index,
        })
    }

    /// Parse `code <ws> 25 binary digits <ws> vocalic-flag` lines. Blank lines
    /// and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut codes: HashMap<String, usize> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            let code = fields[0].to_string();
            if codes.insert(code.clone(), line).is_some() {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate phoneme code '{code}'"),
                });
            }
            let bits = fields[1];
            if bits.chars().count() != FEATURES {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "feature vector has {} digits, expected {FEATURES}",
                        bits.chars().count()
                    ),
                });
            }
            let mut features = [0u8; FEATURES];
            for (slot, c) in features.iter_mut().zip(bits.chars()) {
                *slot = match c {
                    '0' => 0,
                    '1' => 1,
                    other => {
                        return Err(Error::Parse {
                            line,
                            message: format!("non-binary feature digit '{other}'"),
                        })
                    }
                };
            }
            let vocalic = match fields[2] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("vocalic flag must be 0 or 1, found '{other}'"),
                    })
                }
            };
            entries.push(Phoneme {
                code,
                features,
                vocalic,
            });
        }
        Self::new(entries).map_err(|e| match e {
            Error::Duplicate { .. } | Error::InvalidArgument(_) => Error::Parse {
                line: 0,
                message: e.to_string(),
            },
            other => other,
        })
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# code\tfeatures\tvocalic\n");
        for p in &self.entries {
            let bits: String = p
                .features
                .iter()
                .map(|&b| if b == 1 { '1' } else { '0' })
                .collect();
            let _ = writeln!(out, "{}\t{}\t{}", p.code, bits, u8::from(p.vocalic));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Phoneme] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &Phoneme {
        &self.entries[i]
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.index.get(code).copied()
    }

    pub fn lookup(&self, code: &str) -> Result<&Phoneme> {
        self.index_of(code)
            .map(|i| &self.entries[i])
            .ok_or_else(|| Error::UnknownPhoneme(code.to_string()))
    }

    pub fn is_vocalic(&self, code: &str) -> Result<bool> {
        self.lookup(code).map(|p| p.vocalic)
    }

    /// A 40-phoneme English-style inventory (24 consonants, 15 vowels and
    /// padding) over the feature set below. Used when no inventory file is
    /// supplied and by the synthetic lexicon generator.
    ///
    /// Feature order: consonantal, vocalic, sonorant, voiced, labial, dental,
    /// alveolar, postalveolar, velar, glottal, stop, fricative, affricate,
    /// nasal, lateral, rhotic, glide, high, mid, low, front, central, back,
    /// round, tense.
    pub fn builtin() -> Self {
        use feature::*;
        const TABLE: &[(&str, &[usize], bool)] = &[
            ("p", &[CONS, LAB, STOP], false),
            ("b", &[CONS, VOI, LAB, STOP], false),
            ("t", &[CONS, ALV, STOP], false),
            ("d", &[CONS, VOI, ALV, STOP], false),
            ("k", &[CONS, VEL, STOP], false),
            ("g", &[CONS, VOI, VEL, STOP], false),
            ("f", &[CONS, LAB, FRIC], false),
            ("v", &[CONS, VOI, LAB, FRIC], false),
            ("T", &[CONS, DEN, FRIC], false),
            ("D", &[CONS, VOI, DEN, FRIC], false),
            ("s", &[CONS, ALV, FRIC], false),
            ("z", &[CONS, VOI, ALV, FRIC], false),
            ("S", &[CONS, PAL, FRIC], false),
            ("Z", &[CONS, VOI, PAL, FRIC], false),
            ("C", &[CONS, PAL, AFFR], false),
            ("J", &[CONS, VOI, PAL, AFFR], false),
            ("m", &[CONS, SON, VOI, LAB, NAS], false),
            ("n", &[CONS, SON, VOI, ALV, NAS], false),
            ("N", &[CONS, SON, VOI, VEL, NAS], false),
            ("l", &[CONS, SON, VOI, ALV, LAT], false),
            ("r", &[CONS, SON, VOI, ALV, RHO], false),
            ("w", &[SON, VOI, LAB, VEL, GLIDE, ROUND], false),
            ("j", &[SON, VOI, PAL, GLIDE], false),
            ("h", &[CONS, GLOT, FRIC], false),
            ("i", &[VOC, SON, VOI, HIGH, FRONT, TENSE], true),
            ("I", &[VOC, SON, VOI, HIGH, FRONT], true),
            ("e", &[VOC, SON, VOI, MID, FRONT, TENSE], true),
            ("E", &[VOC, SON, VOI, MID, FRONT], true),
            ("@", &[VOC, SON, VOI, LOW, FRONT], true),
            ("a", &[VOC, SON, VOI, LOW, BACK], true),
            ("o", &[VOC, SON, VOI, MID, BACK, ROUND, TENSE], true),
            ("O", &[VOC, SON, VOI, MID, BACK, ROUND], true),
            ("U", &[VOC, SON, VOI, HIGH, BACK, ROUND], true),
            ("u", &[VOC, SON, VOI, HIGH, BACK, ROUND, TENSE], true),
            ("^", &[VOC, SON, VOI, MID, CENT], true),
            ("Y", &[VOC, SON, VOI, LOW, CENT, TENSE], true),
            ("W", &[VOC, SON, VOI, LOW, CENT, ROUND, TENSE], true),
            ("A", &[VOC, SON, VOI, MID, CENT, ROUND, TENSE], true),
            ("R", &[VOC, SON, VOI, MID, CENT, RHO], true),
        ];
        let entries = TABLE
            .iter()
            .map(|&(code, on, vocalic)| {
                let mut features = [0u8; FEATURES];
                for &f in on {
                    features[f] = 1;
                }
                Phoneme {
                    code: code.to_string(),
                    features,
                    vocalic,
                }
            })
            .collect();
        Self::new(entries).expect("builtin inventory is valid")
    }
}

mod feature {
    pub const CONS: usize = 0;
    pub const VOC: usize = 1;
    pub const SON: usize = 2;
    pub const VOI: usize = 3;
    pub const LAB: usize = 4;
    pub const DEN: usize = 5;
    pub const ALV: usize = 6;
    pub const PAL: usize = 7;
    pub const VEL: usize = 8;
    pub const GLOT: usize = 9;
    pub const STOP: usize = 10;
    pub const FRIC: usize = 11;
    pub const AFFR: usize = 12;
    pub const NAS: usize = 13;
    pub const LAT: usize = 14;
    pub const RHO: usize = 15;
    pub const GLIDE: usize = 16;
    pub const HIGH: usize = 17;
    pub const MID: usize = 18;
    pub const LOW: usize = 19;
    pub const FRONT: usize = 20;
    pub const CENT: usize = 21;
    pub const BACK: usize = 22;
    pub const ROUND: usize = 23;
    pub const TENSE: usize = 24;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_line() {
        let inv = PhonemeInventory::parse("k\t0100000000000000000000000\t0\n").unwrap();
        assert_eq!(inv.len(), 2);
        assert_eq!(inv.get(0).code, PAD);
        let k = inv.lookup("k").unwrap();
        assert_eq!(k.features[1], 1);
        assert_eq!(k.features.iter().map(|&b| b as u32).sum::<u32>(), 1);
        assert!(!k.vocalic);
    }

    #[test]
    fn empty_file_yields_padding_only() {
        let inv = PhonemeInventory::parse("").unwrap();
        assert_eq!(inv.len(), 1);
        assert_eq!(inv.get(0).code, PAD);
        assert_eq!(inv.get(0).features, [0; FEATURES]);
    }

    #[test]
    fn duplicate_code_rejected() {
        let text = "k 0100000000000000000000000 0\nk 0010000000000000000000000 0\n";
        assert!(matches!(
            PhonemeInventory::parse(text),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn bad_lengths_and_digits_rejected() {
        assert!(PhonemeInventory::parse("k 0101 0").is_err());
        assert!(PhonemeInventory::parse("k 0100000000000000000000002 0").is_err());
        assert!(PhonemeInventory::parse("k 0100000000000000000000000 x").is_err());
    }

    #[test]
    fn duplicate_features_rejected() {
        let text = "k 0100000000000000000000000 0\ng 0100000000000000000000000 0\n";
        assert!(PhonemeInventory::parse(text).is_err());
    }

    #[test]
    fn explicit_padding_moves_to_front() {
        let text = "k 0100000000000000000000000 0\n_ 0000000000000000000000000 0\n";
        let inv = PhonemeInventory::parse(text).unwrap();
        assert_eq!(inv.get(0).code, PAD);
        assert_eq!(inv.index_of("k"), Some(1));
    }

    #[test]
    fn builtin_round_trips_through_tsv() {
        let inv = PhonemeInventory::builtin();
        assert_eq!(inv.len(), 40);
        assert_eq!(inv.entries().iter().filter(|p| p.vocalic).count(), 15);
        let again = PhonemeInventory::parse(&inv.to_tsv()).unwrap();
        assert_eq!(inv.entries(), again.entries());
    }
}
