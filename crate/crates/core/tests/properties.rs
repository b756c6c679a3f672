use proptest::prelude::*;

use seqteach::analysis::{entropy_bits, levenshtein, spearman_rho, two_sample_t_test};
use seqteach::learner::Decoder;
use seqteach::schedule::{interpolate, LogitVector, Multinomial};
use seqteach::vocab::{decode_orthography, encode_orthography, PhonemeInventory, OUTPUT_DIM};

fn non_constant(xs: &[f64]) -> bool {
    xs.iter().any(|&x| x != xs[0])
}

proptest! {
    #[test]
    fn spearman_ignores_monotone_transforms(
        pairs in prop::collection::vec((0u8..8, -5.0f64..5.0), 3..40)
    ) {
        let xs: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        prop_assume!(non_constant(&xs) && non_constant(&ys));
        let a = spearman_rho(&xs, &ys).unwrap();
        let squashed: Vec<f64> = xs.iter().map(|x| (0.3 * x).exp() - 2.0).collect();
        let b = spearman_rho(&squashed, &ys).unwrap();
        prop_assert!((a.rho - b.rho).abs() < 1e-12);
        let c = spearman_rho(&ys, &xs).unwrap();
        prop_assert!((a.rho - c.rho).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&a.rho));
        prop_assert!((0.0..=1.0).contains(&a.p_value));
    }

    #[test]
    fn welch_is_antisymmetric(
        xs in prop::collection::vec(-10.0f64..10.0, 2..20),
        ys in prop::collection::vec(-10.0f64..10.0, 2..20),
    ) {
        prop_assume!(non_constant(&xs) || non_constant(&ys));
        let a = two_sample_t_test(&xs, &ys).unwrap();
        let b = two_sample_t_test(&ys, &xs).unwrap();
        prop_assert!((a.t + b.t).abs() <= 1e-12 * (1.0 + a.t.abs()));
        prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a.p_value));
        prop_assert!(a.df > 0.0);
    }

    #[test]
    fn entropy_is_bounded(ws in prop::collection::vec(0.0f64..10.0, 1..30)) {
        let h = entropy_bits(&ws);
        let support = ws.iter().filter(|&&w| w > 0.0).count().max(1);
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (support as f64).log2() + 1e-12);
    }

    #[test]
    fn edit_distance_is_a_metric(a in "[a-e]{0,6}", b in "[a-e]{0,6}", c in "[a-e]{0,6}") {
        prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
        prop_assert_eq!(levenshtein(&a, &a), 0);
        prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
    }

    #[test]
    fn logits_round_trip(free in prop::collection::vec(-6.0f64..6.0, 1..50)) {
        let m = LogitVector::new(free.clone()).unwrap().to_multinomial();
        prop_assert!((m.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(m.probs().iter().all(|&p| p > 0.0));
        let back = LogitVector::from_multinomial(&m).unwrap();
        for (a, b) in back.free.iter().zip(&free) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn interpolation_stays_in_the_envelope(
        wp in prop::collection::vec(0.01f64..1.0, 2..20),
        wq in prop::collection::vec(0.01f64..1.0, 2..20),
        horizon in 1usize..3000,
        frac in 0.0f64..=1.0,
    ) {
        let k = wp.len().min(wq.len());
        let p = Multinomial::from_weights(&wp[..k]).unwrap();
        let q = Multinomial::from_weights(&wq[..k]).unwrap();
        let t = (frac * horizon as f64) as usize;
        let r = interpolate(&p, &q, t, horizon).unwrap();
        for ((&ri, &pi), &qi) in r.probs().iter().zip(p.probs()).zip(q.probs()) {
            prop_assert!(ri >= pi.min(qi) - 1e-15 && ri <= pi.max(qi) + 1e-15);
        }
        prop_assert_eq!(&interpolate(&p, &q, 0, horizon).unwrap(), &p);
        prop_assert_eq!(&interpolate(&p, &q, horizon, horizon).unwrap(), &q);
    }

    #[test]
    fn decoding_is_idempotent(y_hat in prop::collection::vec(0.0f64..1.0, OUTPUT_DIM)) {
        let dec = Decoder::new(&PhonemeInventory::builtin());
        let once = dec.decode_output(&y_hat).unwrap();
        prop_assert_eq!(dec.decode_output(&once).unwrap(), once.clone());
        prop_assert!(dec.matches(&y_hat, &once));
    }

    #[test]
    fn orthography_round_trips(aligned in "[a-z_]{10}") {
        let o = encode_orthography(&aligned).unwrap();
        prop_assert_eq!(o.iter().filter(|&&b| b == 1.0).count(), aligned.chars().filter(|&c| c != '_').count());
        prop_assert_eq!(decode_orthography(&o).unwrap(), aligned);
    }
}
