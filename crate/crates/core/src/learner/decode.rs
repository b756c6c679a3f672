use crate::error::{Error, Result};
use crate::vocab::{PhonemeInventory, FEATURES, PHON_SLOTS};

/// Nearest-phoneme decoder over a fixed inventory.
///
/// Distances are compared squared; ties resolve to the lowest inventory
/// index, which is the padding phoneme when it is among the tied entries.
#[derive(Clone, Debug)]
pub struct Decoder {
    features: Vec<[f64; FEATURES]>,
    codes: Vec<String>,
}

impl Decoder {
    pub fn new(inventory: &PhonemeInventory) -> Self {
        let features = inventory
            .entries()
            .iter()
            .map(|p| {
                let mut f = [0.0; FEATURES];
                for (dst, &b) in f.iter_mut().zip(&p.features) {
                    *dst = f64::from(b);
                }
                f
            })
            .collect();
        let codes = inventory.entries().iter().map(|p| p.code.clone()).collect();
        Self { features, codes }
    }

    /// Inventory index of the phoneme nearest to `m_hat`.
    pub fn nearest(&self, m_hat: &[f64]) -> Result<usize> {
        if self.features.is_empty() {
            return Err(Error::Empty("phoneme inventory"));
        }
        if m_hat.len() != FEATURES {
            return Err(Error::Shape {
                expected: FEATURES,
                actual: m_hat.len(),
            });
        }
        Ok(self.nearest_unchecked(m_hat))
    }

    #[inline]
    fn nearest_unchecked(&self, m_hat: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, f) in self.features.iter().enumerate() {
            let d: f64 = f.iter().zip(m_hat).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn code(&self, index: usize) -> &str {
        &self.codes[index]
    }

    pub fn features(&self, index: usize) -> &[f64; FEATURES] {
        &self.features[index]
    }

    /// Slot-wise nearest phonemes for a full output vector.
    pub fn decode_indices(&self, y_hat: &[f64]) -> Result<Vec<usize>> {
        check_output(y_hat)?;
        if self.features.is_empty() {
            return Err(Error::Empty("phoneme inventory"));
        }
        Ok(y_hat
            .chunks_exact(FEATURES)
            .map(|m| self.nearest_unchecked(m))
            .collect())
    }

    /// The decoding map: nearest phoneme per slot, re-encoded as features.
    pub fn decode_output(&self, y_hat: &[f64]) -> Result<Vec<f64>> {
        let idx = self.decode_indices(y_hat)?;
        Ok(idx.iter().flat_map(|&i| self.features[i]).collect())
    }

    /// Whether the decoded output equals the binary target `y` in every slot.
    pub fn matches(&self, y_hat: &[f64], y: &[f64]) -> bool {
        y_hat
            .chunks_exact(FEATURES)
            .zip(y.chunks_exact(FEATURES))
            .all(|(m, t)| self.features[self.nearest_unchecked(m)][..] == t[..])
    }
}

fn check_output(y_hat: &[f64]) -> Result<()> {
    if y_hat.len() != FEATURES * PHON_SLOTS {
        return Err(Error::Shape {
            expected: FEATURES * PHON_SLOTS,
            actual: y_hat.len(),
        });
    }
    Ok(())
}

pub fn decode_phoneme(m_hat: &[f64], inventory: &PhonemeInventory) -> Result<String> {
    let d = Decoder::new(inventory);
    let i = d.nearest(m_hat)?;
    Ok(d.code(i).to_string())
}

pub fn decode_output(y_hat: &[f64], inventory: &PhonemeInventory) -> Result<Vec<f64>> {
    Decoder::new(inventory).decode_output(y_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::vocab::PAD;
    use rand::RngExt;

    #[test]
    fn exact_features_decode_to_themselves() {
        let inv = PhonemeInventory::builtin();
        for p in inv.entries() {
            let m: Vec<f64> = p.features.iter().map(|&b| f64::from(b)).collect();
            assert_eq!(decode_phoneme(&m, &inv).unwrap(), p.code);
        }
        assert_eq!(decode_phoneme(&[0.0; FEATURES], &inv).unwrap(), PAD);
    }

    #[test]
    fn brute_force_agreement() {
        let inv = PhonemeInventory::builtin();
        let d = Decoder::new(&inv);
        let mut rng = rng::rng_from_seed(1);
        for _ in 0..2000 {
            let m: Vec<f64> = (0..FEATURES).map(|_| rng.random::<f64>()).collect();
            let dist = |p: &crate::vocab::Phoneme| -> f64 {
                p.features
                    .iter()
                    .zip(&m)
                    .map(|(&b, &v)| (f64::from(b) - v).powi(2))
                    .sum::<f64>()
                    .sqrt()
            };
            let mut best = 0;
            for (i, p) in inv.entries().iter().enumerate() {
                if dist(p) < dist(inv.get(best)) {
                    best = i;
                }
            }
            assert_eq!(d.nearest(&m).unwrap(), best);
        }
    }

    #[test]
    fn half_everywhere_ties_to_padding() {
        let inv = PhonemeInventory::builtin();
        let out = decode_output(&[0.5; 200], &inv).unwrap();
        assert!(out.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn decoding_is_idempotent() {
        let inv = PhonemeInventory::builtin();
        let d = Decoder::new(&inv);
        let mut rng = rng::rng_from_seed(2);
        for _ in 0..100 {
            let y: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
            let once = d.decode_output(&y).unwrap();
            assert_eq!(d.decode_output(&once).unwrap(), once);
        }
    }

    #[test]
    fn shape_errors() {
        let inv = PhonemeInventory::builtin();
        assert!(decode_phoneme(&[0.0; 3], &inv).is_err());
        assert!(decode_output(&[0.0; 199], &inv).is_err());
    }
}
