//! The connectionist reading model.
//!
//! A 260-100-200 sigmoid network trained online with Nesterov momentum on a
//! summed binary cross-entropy. Output vectors are decoded slot by slot to
//! the nearest phoneme; a word counts as read correctly only if all eight
//! decoded slots match its target.

mod decode;
mod network;

pub use decode::{decode_output, decode_phoneme, Decoder};
pub use network::{
    accumulate_gradient, cross_entropy, forward_params, gradient, loss, sigmoid, Dims, Hyper,
    LearnerState, Params, DEFAULT_INIT_SCALE, DEFAULT_LR, DEFAULT_MOMENTUM, HIDDEN_DIM, LOSS_EPS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vocab::WordItem;

/// Learning rate used for full-batch training in the pool-size sweep.
pub const BATCH_LR: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub y_hat: Vec<f64>,
    pub decoded: Vec<String>,
}

pub fn forward(state: &LearnerState, o: &[f64], decoder: &Decoder) -> Result<Prediction> {
    let y_hat = state.activations(o)?;
    let decoded = decoder
        .decode_indices(&y_hat)?
        .into_iter()
        .map(|i| decoder.code(i).to_string())
        .collect();
    Ok(Prediction { y_hat, decoded })
}

pub fn predict_correct(state: &LearnerState, item: &WordItem, decoder: &Decoder) -> Result<bool> {
    let y_hat = state.activations(&item.o)?;
    Ok(decoder.matches(&y_hat, &item.y))
}

/// Fraction of `test` items read incorrectly.
pub fn terminal_cost(state: &LearnerState, test: &[&WordItem], decoder: &Decoder) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let wrong = count_correct(state, test, decoder).map(|c| test.len() - c)?;
    Ok(wrong as f64 / test.len() as f64)
}

pub fn count_correct(
    state: &LearnerState,
    items: &[&WordItem],
    decoder: &Decoder,
) -> Result<usize> {
    let mut correct = 0;
    for item in items {
        if predict_correct(state, item, decoder)? {
            correct += 1;
        }
    }
    Ok(correct)
}

/// Present `sequence` (indices into `pool`) one item at a time.
pub fn train_sequence(
    state: &mut LearnerState,
    pool: &[&WordItem],
    sequence: &[usize],
) -> Result<()> {
    if let Some(first) = pool.first() {
        state.check_example(&first.o, &first.y)?;
    }
    if let Some(&i) = sequence.iter().find(|&&i| i >= pool.len()) {
        return Err(Error::InvalidArgument(format!(
            "sequence index {i} outside pool of {}",
            pool.len()
        )));
    }
    state.train_many(
        sequence
            .iter()
            .map(|&i| (pool[i].o.as_slice(), pool[i].y.as_slice())),
    );
    if !state.params.all_finite() {
        return Err(Error::NonFinite("training"));
    }
    Ok(())
}

/// Stopping rule for full-batch training.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceCriteria {
    pub max_epochs: usize,
    /// Stop after this many epochs without a new best training accuracy,
    /// counted once at least one pool word is read correctly.
    pub patience: usize,
    pub target_train_acc: f64,
}

impl Default for ConvergenceCriteria {
    fn default() -> Self {
        Self {
            max_epochs: 2000,
            patience: 50,
            target_train_acc: 1.0,
        }
    }
}

/// Full-batch Nesterov training on the per-item loss averaged over `pool`, with the
/// state's momentum and the given learning rate. Returns the final state and
/// the number of epochs (updates) performed.
pub fn batch_train_to_convergence(
    state: &LearnerState,
    pool: &[&WordItem],
    lr: f64,
    criteria: &ConvergenceCriteria,
    decoder: &Decoder,
) -> Result<(LearnerState, usize)> {
    if pool.is_empty() {
        return Err(Error::Empty("training pool"));
    }
    for item in pool {
        state.check_example(&item.o, &item.y)?;
    }
    let mut s = state.clone();
    let mu = s.hyper.momentum;
    let d = s.dims;
    let accuracy = |s: &LearnerState| -> Result<f64> {
        Ok(count_correct(s, pool, decoder)? as f64 / pool.len() as f64)
    };
    let mut best = accuracy(&s)?;
    let mut since_best = 0;
    let mut epochs = 0;
    while epochs < criteria.max_epochs && best < criteria.target_train_acc {
        let look = s.params.added(&s.velocity, mu);
        let mut grad = Params::zeros(d);
        for item in pool {
            accumulate_gradient(&look, d, &item.o, &item.y, &mut grad);
        }
        s.params
            .momentum_update(&mut s.velocity, &grad, mu, lr / pool.len() as f64);
        epochs += 1;
        if !s.params.all_finite() {
            return Err(Error::NonFinite("batch training"));
        }
        let acc = accuracy(&s)?;
        if acc > best {
            best = acc;
            since_best = 0;
        } else if best > 0.0 {
            since_best += 1;
            if since_best >= criteria.patience {
                break;
            }
        }
    }
    Ok((s, epochs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::{generate_synthetic_vocabulary, PhonemeInventory, SyntheticSpec};

    fn small_vocab() -> crate::vocab::Vocabulary {
        let spec = SyntheticSpec {
            n_words: 12,
            ..SyntheticSpec::default()
        };
        generate_synthetic_vocabulary(&spec, 1).unwrap().vocabulary
    }

    #[test]
    fn untrained_zero_net_reads_nothing() {
        let v = small_vocab();
        let dec = Decoder::new(v.inventory());
        let s = LearnerState::init(Dims::READING, Hyper::default(), 0, 0.0).unwrap();
        let items: Vec<&WordItem> = v.items().iter().collect();
        for it in &items {
            assert!(!predict_correct(&s, it, &dec).unwrap());
            let p = forward(&s, &it.o, &dec).unwrap();
            assert!(p.decoded.iter().all(|c| c == "_"));
        }
        assert_eq!(terminal_cost(&s, &items, &dec).unwrap(), 1.0);
        assert!(terminal_cost(&s, &[], &dec).is_err());
    }

    #[test]
    fn memorizes_single_item() {
        let v = small_vocab();
        let dec = Decoder::new(v.inventory());
        let item = v.item(0);
        let mut s = LearnerState::reading(3);
        for _ in 0..500 {
            s.train_step(&item.o, &item.y);
        }
        assert!(predict_correct(&s, item, &dec).unwrap());
        assert_eq!(terminal_cost(&s, &[item], &dec).unwrap(), 0.0);
    }

    #[test]
    fn one_wrong_slot_is_wrong() {
        let inv = PhonemeInventory::builtin();
        let dec = Decoder::new(&inv);
        let v = small_vocab();
        let item = v.item(0);
        let mut y_hat = item.y.clone();
        assert!(dec.matches(&y_hat, &item.y));
        // Replace the vowel slot with the padding phoneme.
        for f in &mut y_hat[3 * 25..4 * 25] {
            *f = 0.0;
        }
        assert!(!dec.matches(&y_hat, &item.y));
    }

    #[test]
    fn cost_counts_fraction_wrong() {
        let v = small_vocab();
        let dec = Decoder::new(v.inventory());
        let mut s = LearnerState::reading(5);
        let (a, b, c) = (v.item(0), v.item(1), v.item(2));
        for _ in 0..800 {
            s.train_step(&a.o, &a.y);
            s.train_step(&b.o, &b.y);
            s.train_step(&c.o, &c.y);
        }
        let zero = LearnerState::init(Dims::READING, Hyper::default(), 0, 0.0).unwrap();
        let items = vec![a, b, c, v.item(3), v.item(4), v.item(5)];
        let known = [a, b, c];
        assert_eq!(terminal_cost(&s, &known, &dec).unwrap(), 0.0);
        let wrong = items
            .iter()
            .filter(|it| !predict_correct(&s, it, &dec).unwrap())
            .count();
        let cost = terminal_cost(&s, &items, &dec).unwrap();
        assert_eq!(cost, wrong as f64 / 6.0);
        assert_eq!(terminal_cost(&zero, &items, &dec).unwrap(), 1.0);
    }

    #[test]
    fn sequence_training_is_a_fold() {
        let v = small_vocab();
        let pool: Vec<&WordItem> = v.items().iter().take(4).collect();
        let seq = [0, 3, 1, 1, 2, 0, 3];
        let mut a = LearnerState::reading(8);
        let mut b = a.clone();
        train_sequence(&mut a, &pool, &seq).unwrap();
        for &i in &seq {
            b = b.stepped(&pool[i].o, &pool[i].y);
        }
        for i in 0..a.params.len() {
            let (x, y) = (a.params.get(i), b.params.get(i));
            assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
        assert!(train_sequence(&mut a, &pool, &[9]).is_err());
    }

    #[test]
    fn batch_training() {
        let v = small_vocab();
        let dec = Decoder::new(v.inventory());
        let s = LearnerState::reading(2);
        let one = [v.item(0)];
        let (t, epochs) =
            batch_train_to_convergence(&s, &one, BATCH_LR, &ConvergenceCriteria::default(), &dec)
                .unwrap();
        assert!(epochs > 0 && epochs <= 2000);
        assert!(predict_correct(&t, v.item(0), &dec).unwrap());

        let none = ConvergenceCriteria {
            max_epochs: 0,
            ..ConvergenceCriteria::default()
        };
        let (same, e0) = batch_train_to_convergence(&s, &one, BATCH_LR, &none, &dec).unwrap();
        assert_eq!(e0, 0);
        assert_eq!(same, s);

        let pool: Vec<&WordItem> = v.items().iter().take(6).collect();
        let crit = ConvergenceCriteria {
            max_epochs: 50,
            ..ConvergenceCriteria::default()
        };
        let r1 = batch_train_to_convergence(&s, &pool, BATCH_LR, &crit, &dec).unwrap();
        let r2 = batch_train_to_convergence(&s, &pool, BATCH_LR, &crit, &dec).unwrap();
        assert_eq!(r1, r2);
        assert!(batch_train_to_convergence(&s, &[], BATCH_LR, &crit, &dec).is_err());
    }
}
