//! Sampling distributions over the training pool.
//!
//! A teacher holds a start multinomial `P` and an end multinomial `Q` over
//! the `K` pool items and, at training round `t` of `T`, draws from
//! `R_t = (T - t)/T * P + t/T * Q`. Both multinomials are parametrized by
//! unconstrained logits whose last entry is pinned to 1.

use std::fmt::Write as _;

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::vocab::{PoolSplit, Vocabulary};

/// Tolerance on the total mass of a [`Multinomial`].
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Offset used by the inverse weight transform.
pub const INVERSE_EPS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Multinomial {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Multinomial {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<Multinomial> for Vec<f64> {
    fn from(m: Multinomial) -> Self {
        m.probs
    }
}

impl Multinomial {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty("multinomial"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidArgument(
                "probabilities must be finite and >= 0".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn one_hot(k: usize, i: usize) -> Self {
        let mut probs = vec![0.0; k];
        probs[i] = 1.0;
        Self { probs }
    }

    /// Normalize nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(
                "weights must be finite and >= 0".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("weights sum to zero".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    fn cumulative(&self) -> Vec<f64> {
        self.probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }
}

/// Softmax logits over `K` items with the `K`-th logit fixed at 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogitVector {
    pub free: Vec<f64>,
}

impl LogitVector {
    pub const FIXED: f64 = 1.0;

    pub fn new(free: Vec<f64>) -> Result<Self> {
        if free.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("logits"));
        }
        Ok(Self { free })
    }

    /// Logits of the uniform distribution (all equal to the fixed entry).
    pub fn uniform(k: usize) -> Self {
        Self {
            free: vec![Self::FIXED; k.saturating_sub(1)],
        }
    }

    pub fn k(&self) -> usize {
        self.free.len() + 1
    }

    /// Logits reproducing a strictly positive multinomial:
    /// `alpha_i = ln p_i - ln p_K + 1`.
    pub fn from_multinomial(m: &Multinomial) -> Result<Self> {
        let p = m.probs();
        if p.iter().any(|&x| x <= 0.0) {
            return Err(Error::InvalidArgument(
                "cannot take logits of a distribution with zero entries".into(),
            ));
        }
        let last = p[p.len() - 1].ln();
        Self::new(
            p[..p.len() - 1]
                .iter()
                .map(|x| x.ln() - last + Self::FIXED)
                .collect(),
        )
    }

    pub fn to_multinomial(&self) -> Multinomial {
        logits_to_multinomial(self)
    }
}

/// Max-shifted softmax over `free ++ [1]`.
pub fn logits_to_multinomial(logits: &LogitVector) -> Multinomial {
    let max = logits
        .free
        .iter()
        .copied()
        .fold(LogitVector::FIXED, f64::max);
    let mut probs: Vec<f64> = logits
        .free
        .iter()
        .chain(std::iter::once(&LogitVector::FIXED))
        .map(|a| (a - max).exp())
        .collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Multinomial { probs }
}

/// `R_t = (T - t)/T * P + t/T * Q` for `0 <= t <= T`.
pub fn interpolate(
    p: &Multinomial,
    q: &Multinomial,
    t: usize,
    horizon: usize,
) -> Result<Multinomial> {
    if p.k() != q.k() {
        return Err(Error::Shape {
            expected: p.k(),
            actual: q.k(),
        });
    }
    if horizon == 0 || t > horizon {
        return Err(Error::InvalidArgument(format!(
            "round {t} outside 0..={horizon}"
        )));
    }
    if t == 0 {
        return Ok(p.clone());
    }
    if t == horizon {
        return Ok(q.clone());
    }
    let (a, b) = weights_at(t, horizon);
    Ok(Multinomial {
        probs: p
            .probs
            .iter()
            .zip(&q.probs)
            .map(|(x, y)| a * x + b * y)
            .collect(),
    })
}

#[inline]
fn weights_at(t: usize, horizon: usize) -> (f64, f64) {
    let tt = horizon as f64;
    ((tt - t as f64) / tt, t as f64 / tt)
}

/// The pair `(P, Q)` and the horizon `T` it is used over.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeVaryingDistribution {
    p: Multinomial,
    q: Multinomial,
    horizon: usize,
    cum_p: Vec<f64>,
    cum_q: Vec<f64>,
}

impl TimeVaryingDistribution {
    pub fn new(p: Multinomial, q: Multinomial, horizon: usize) -> Result<Self> {
        if p.k() != q.k() {
            return Err(Error::Shape {
                expected: p.k(),
                actual: q.k(),
            });
        }
        let (cum_p, cum_q) = (p.cumulative(), q.cumulative());
        Ok(Self {
            p,
            q,
            horizon,
            cum_p,
            cum_q,
        })
    }

    pub fn from_logits(alpha: &LogitVector, beta: &LogitVector, horizon: usize) -> Result<Self> {
        Self::new(alpha.to_multinomial(), beta.to_multinomial(), horizon)
    }

    pub fn start(&self) -> &Multinomial {
        &self.p
    }

    pub fn end(&self) -> &Multinomial {
        &self.q
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn k(&self) -> usize {
        self.p.k()
    }

    pub fn at(&self, t: usize) -> Result<Multinomial> {
        interpolate(&self.p, &self.q, t, self.horizon)
    }

    /// Inverse-CDF draw from `R_t` for a uniform variate `u` in `[0, 1)`,
    /// scanning items in pool order. Zero-probability items are never drawn.
    pub fn draw_with(&self, t: usize, u: f64) -> usize {
        let (cp, cq) = (&self.cum_p, &self.cum_q);
        let (a, b) = if self.horizon == 0 {
            (1.0, 0.0)
        } else {
            weights_at(t, self.horizon)
        };
        let cdf = |i: usize| a * cp[i] + b * cq[i];
        let k = cp.len();
        let i = partition_point(k, |i| cdf(i) <= u);
        if i < k {
            return i;
        }
        // u beyond the rounded total: fall back to the last item with mass.
        (0..k)
            .rev()
            .find(|&i| a * self.p.probs[i] + b * self.q.probs[i] > 0.0)
            .unwrap_or(k - 1)
    }

    pub fn draw(&self, t: usize, rng: &mut rng::Rng) -> usize {
        self.draw_with(t, rng.random::<f64>())
    }
}

fn partition_point(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// A non-time-varying distribution: `P = Q`.
pub fn stationary(p: &Multinomial, horizon: usize) -> TimeVaryingDistribution {
    TimeVaryingDistribution::new(p.clone(), p.clone(), horizon).expect("same K")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSequence {
    /// Indices into the pool, one per training round.
    pub item_indices: Vec<usize>,
    pub seed: u64,
}

/// Independent draws `u_t ~ R_t` for `t = 0..T-1`.
pub fn sample_sequence(tvd: &TimeVaryingDistribution, seed: u64) -> TrainingSequence {
    let mut rng = rng::rng_from_seed(seed);
    let item_indices = (0..tvd.horizon).map(|t| tvd.draw(t, &mut rng)).collect();
    TrainingSequence { item_indices, seed }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightTransform {
    Identity,
    /// `1 / (w + eps)`: smaller values (e.g. earlier acquisition) weigh more.
    Inverse,
}

/// Baseline sampling rule over the pool.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineKind {
    Uniform,
    Column {
        name: String,
        transform: WeightTransform,
    },
}

impl BaselineKind {
    /// Parse `uniform`, `<column>` or `<column>:inverse`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.is_empty() {
            return Err(Error::InvalidArgument("empty baseline name".into()));
        }
        if spec == "uniform" {
            return Ok(Self::Uniform);
        }
        match spec.split_once(':') {
            None => Ok(Self::Column {
                name: spec.to_string(),
                transform: WeightTransform::Identity,
            }),
            Some((name, "inverse")) => Ok(Self::Column {
                name: name.to_string(),
                transform: WeightTransform::Inverse,
            }),
            Some((name, "identity")) => Ok(Self::Column {
                name: name.to_string(),
                transform: WeightTransform::Identity,
            }),
            Some((_, other)) => Err(Error::InvalidArgument(format!(
                "unknown transform '{other}'"
            ))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Uniform => "uniform".into(),
            Self::Column {
                name,
                transform: WeightTransform::Identity,
            } => name.clone(),
            Self::Column {
                name,
                transform: WeightTransform::Inverse,
            } => format!("{name}:inverse"),
        }
    }
}

/// Baseline multinomial over the pool. Pool words lacking the weight column
/// get probability zero; a column absent from every pool word is an error.
pub fn baseline_distribution(
    vocab: &Vocabulary,
    split: &PoolSplit,
    kind: &BaselineKind,
) -> Result<Multinomial> {
    let k = split.k();
    if k == 0 {
        return Err(Error::Empty("training pool"));
    }
    match kind {
        BaselineKind::Uniform => Ok(Multinomial::uniform(k)),
        BaselineKind::Column { name, transform } => {
            let raw: Vec<Option<f64>> = split
                .pool
                .iter()
                .map(|&i| vocab.item(i).weight(name))
                .collect();
            if raw.iter().all(Option::is_none) {
                let word = split
                    .pool
                    .first()
                    .map(|&i| vocab.item(i).word.clone())
                    .unwrap_or_default();
                return Err(Error::MissingColumn {
                    column: name.clone(),
                    word,
                });
            }
            let weights: Vec<f64> = raw
                .iter()
                .map(|w| match (w, transform) {
                    (None, _) => 0.0,
                    (Some(w), WeightTransform::Identity) => *w,
                    (Some(w), WeightTransform::Inverse) => 1.0 / (w + INVERSE_EPS),
                })
                .collect();
            Multinomial::from_weights(&weights)
        }
    }
}

/// CSV with columns `word,p_start,p_end,mean_pq` in pool order.
pub fn distribution_csv(
    vocab: &Vocabulary,
    split: &PoolSplit,
    p: &Multinomial,
    q: &Multinomial,
) -> Result<String> {
    if p.k() != split.k() || q.k() != split.k() {
        return Err(Error::Shape {
            expected: split.k(),
            actual: p.k().min(q.k()),
        });
    }
    let mut out = String::from("word,p_start,p_end,mean_pq\n");
    for (j, &i) in split.pool.iter().enumerate() {
        let (a, b) = (p.probs[j], q.probs[j]);
        let _ = writeln!(out, "{},{},{},{}", vocab.item(i).word, a, b, 0.5 * (a + b));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn softmax_examples() {
        let m = logits_to_multinomial(&LogitVector::new(vec![1.0, 1.0]).unwrap());
        assert!(close(m.probs(), &[1.0 / 3.0; 3], 1e-15));
        let m = logits_to_multinomial(&LogitVector::new(vec![1.0 + 2f64.ln(), 1.0]).unwrap());
        // e^(1+ln2) : e : e = 2 : 1 : 1
        assert!(close(m.probs(), &[0.5, 0.25, 0.25], 1e-15));
    }

    #[test]
    fn softmax_is_shift_invariant_and_stable() {
        let base = logits_to_multinomial(&LogitVector::new(vec![0.3, -2.0, 4.0]).unwrap());
        // Shifting all logits (including the fixed one) by c is equivalent to
        // shifting the free ones by c and renormalizing against 1 + c.
        let c = 7.5;
        let raw = [0.3 + c, -2.0 + c, 4.0 + c, 1.0 + c];
        let max = raw.iter().cloned().fold(f64::MIN, f64::max);
        let e: Vec<f64> = raw.iter().map(|a| (a - max).exp()).collect();
        let s: f64 = e.iter().sum();
        let shifted: Vec<f64> = e.iter().map(|x| x / s).collect();
        assert!(close(base.probs(), &shifted, 1e-15));
        let huge = logits_to_multinomial(&LogitVector::new(vec![800.0, -800.0]).unwrap());
        assert!(huge.probs().iter().all(|p| p.is_finite()));
        assert!((huge.probs()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn logits_round_trip() {
        let m = Multinomial::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let back = LogitVector::from_multinomial(&m).unwrap().to_multinomial();
        assert!(close(m.probs(), back.probs(), 1e-15));
        assert_eq!(
            LogitVector::uniform(4).to_multinomial(),
            Multinomial::uniform(4)
        );
        assert!(LogitVector::from_multinomial(&Multinomial::one_hot(3, 0)).is_err());
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let p = Multinomial::new(vec![0.8, 0.2]).unwrap();
        let q = Multinomial::new(vec![0.2, 0.8]).unwrap();
        assert_eq!(interpolate(&p, &q, 0, 10).unwrap(), p);
        assert_eq!(interpolate(&p, &q, 10, 10).unwrap(), q);
        assert!(close(
            interpolate(&p, &q, 5, 10).unwrap().probs(),
            &[0.5, 0.5],
            1e-15
        ));
        for t in 0..=10 {
            assert!(close(
                interpolate(&p, &p, t, 10).unwrap().probs(),
                p.probs(),
                1e-15
            ));
        }
        assert!(interpolate(&p, &q, 11, 10).is_err());
    }

    #[test]
    fn one_hot_sequences() {
        let p = Multinomial::one_hot(4, 2);
        let s = sample_sequence(&stationary(&p, 50), 1);
        assert!(s.item_indices.iter().all(|&i| i == 2));
        assert_eq!(s, sample_sequence(&stationary(&p, 50), 1));
    }

    #[test]
    fn zero_mass_items_never_drawn() {
        let p = Multinomial::new(vec![0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        let tvd = stationary(&p, 10);
        for u in [
            0.0,
            0.25,
            0.4999999,
            0.5,
            0.9999999999,
            1.0 - f64::EPSILON / 2.0,
            1.0,
        ] {
            let i = tvd.draw_with(3, u);
            assert!(i == 1 || i == 3, "u {u} drew {i}");
        }
    }

    #[test]
    fn baselines() {
        use crate::vocab::{parse_vocabulary, PhonemeInventory};
        let text = "word\tphonemes\tfreq\taoa\n\
                    cat\tk @ t\t3\t2\n\
                    bat\tb @ t\t1\t2\n\
                    dog\td a g\t\t5\n";
        let v = parse_vocabulary(text, &PhonemeInventory::builtin()).unwrap();
        let split = PoolSplit {
            pool: vec![0, 1],
            test: vec![2],
        };
        let uni = baseline_distribution(&v, &split, &BaselineKind::Uniform).unwrap();
        assert_eq!(uni.probs(), &[0.5, 0.5]);
        let f = baseline_distribution(&v, &split, &BaselineKind::parse("freq").unwrap()).unwrap();
        assert!(close(f.probs(), &[0.75, 0.25], 1e-15));
        let a = baseline_distribution(&v, &split, &BaselineKind::parse("aoa:inverse").unwrap())
            .unwrap();
        assert!(close(a.probs(), &[0.5, 0.5], 1e-15));
        assert!(baseline_distribution(&v, &split, &BaselineKind::parse("nope").unwrap()).is_err());
        let all = PoolSplit {
            pool: vec![0, 1, 2],
            test: vec![],
        };
        let f3 = baseline_distribution(&v, &all, &BaselineKind::parse("freq").unwrap()).unwrap();
        assert_eq!(f3.probs()[2], 0.0);
        assert_eq!(
            BaselineKind::parse("aoa:inverse").unwrap().label(),
            "aoa:inverse"
        );
        assert!(BaselineKind::parse("aoa:log").is_err());
    }

    #[test]
    fn csv_export() {
        use crate::vocab::{parse_vocabulary, PhonemeInventory};
        let v = parse_vocabulary(
            "word\tphonemes\ncat\tk @ t\nbat\tb @ t\n",
            &PhonemeInventory::builtin(),
        )
        .unwrap();
        let split = PoolSplit {
            pool: vec![0, 1],
            test: vec![],
        };
        let p = Multinomial::new(vec![0.75, 0.25]).unwrap();
        let q = Multinomial::uniform(2);
        let csv = distribution_csv(&v, &split, &p, &q).unwrap();
        assert_eq!(
            csv,
            "word,p_start,p_end,mean_pq\ncat,0.75,0.5,0.625\nbat,0.25,0.5,0.375\n"
        );
    }
}
