use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::vocab::{INPUT_DIM, OUTPUT_DIM};

pub const HIDDEN_DIM: usize = 100;
pub const DEFAULT_LR: f64 = 0.02;
pub const DEFAULT_MOMENTUM: f64 = 0.9;
pub const DEFAULT_INIT_SCALE: f64 = 0.1;
/// Predictions are clamped into `[EPS, 1 - EPS]` before taking logs.
pub const LOSS_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
}

impl Dims {
    /// The 260-100-200 reading network.
    pub const READING: Dims = Dims {
        input: INPUT_DIM,
        hidden: HIDDEN_DIM,
        output: OUTPUT_DIM,
    };

    pub fn new(input: usize, hidden: usize, output: usize) -> Self {
        Self {
            input,
            hidden,
            output,
        }
    }

    pub fn param_count(&self) -> usize {
        self.input * self.hidden + self.hidden + self.hidden * self.output + self.output
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub lr: f64,
    pub momentum: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            lr: DEFAULT_LR,
            momentum: DEFAULT_MOMENTUM,
        }
    }
}

/// Weights and biases of a one-hidden-layer network.
///
/// `w1` is stored input-major (`w1[i * hidden + h]` connects input `i` to
/// hidden unit `h`) so that the few active letters of an input touch
/// contiguous memory; `w2` is output-major (`w2[o * hidden + h]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Params {
    pub fn zeros(d: Dims) -> Self {
        Self {
            w1: vec![0.0; d.input * d.hidden],
            b1: vec![0.0; d.hidden],
            w2: vec![0.0; d.hidden * d.output],
            b2: vec![0.0; d.output],
        }
    }

    fn parts(&self) -> [&Vec<f64>; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    fn parts_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn len(&self) -> usize {
        self.parts().iter().map(|p| p.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat view: `w1 ++ b1 ++ w2 ++ b2`.
    pub fn get(&self, mut idx: usize) -> f64 {
        for p in self.parts() {
            if idx < p.len() {
                return p[idx];
            }
            idx -= p.len();
        }
        panic!("parameter index out of range")
    }

    pub fn set(&mut self, mut idx: usize, value: f64) {
        for p in self.parts_mut() {
            if idx < p.len() {
                p[idx] = value;
                return;
            }
            idx -= p.len();
        }
        panic!("parameter index out of range")
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .copied()
    }

    pub fn all_finite(&self) -> bool {
        self.iter().all(f64::is_finite)
    }

    fn matches(&self, d: Dims) -> bool {
        self.w1.len() == d.input * d.hidden
            && self.b1.len() == d.hidden
            && self.w2.len() == d.hidden * d.output
            && self.b2.len() == d.output
    }

    /// `v <- mu v - lr grad; self <- self + v`.
    pub fn momentum_update(&mut self, velocity: &mut Params, grad: &Params, mu: f64, lr: f64) {
        for ((w, v), g) in self
            .parts_mut()
            .into_iter()
            .zip(velocity.parts_mut())
            .zip(grad.parts())
        {
            for ((wi, vi), gi) in w.iter_mut().zip(v.iter_mut()).zip(g) {
                *vi = mu * *vi - lr * gi;
                *wi += *vi;
            }
        }
    }

    /// `self + scale * other`, elementwise.
    pub fn added(&self, other: &Params, scale: f64) -> Params {
        let mut out = self.clone();
        for (dst, src) in out.parts_mut().into_iter().zip(other.parts()) {
            for (a, b) in dst.iter_mut().zip(src) {
                *a += scale * b;
            }
        }
        out
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Hidden and output activations for `params` on input `x`.
pub fn forward_params(params: &Params, d: Dims, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut hidden = params.b1.clone();
    for (i, &xi) in x.iter().enumerate() {
        if xi != 0.0 {
            let col = &params.w1[i * d.hidden..(i + 1) * d.hidden];
            for (a, &w) in hidden.iter_mut().zip(col) {
                *a += xi * w;
            }
        }
    }
    for a in &mut hidden {
        *a = sigmoid(*a);
    }
    let out = params
        .b2
        .iter()
        .zip(params.w2.chunks_exact(d.hidden))
        .map(|(&b, row)| sigmoid(b + dot(row, &hidden)))
        .collect();
    (hidden, out)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Summed binary cross-entropy over all outputs.
pub fn cross_entropy(y_hat: &[f64], y: &[f64]) -> f64 {
    y_hat
        .iter()
        .zip(y)
        .map(|(&p, &t)| {
            let p = p.clamp(LOSS_EPS, 1.0 - LOSS_EPS);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum()
}

pub fn loss(params: &Params, d: Dims, x: &[f64], y: &[f64]) -> f64 {
    cross_entropy(&forward_params(params, d, x).1, y)
}

/// Add the backprop gradient of the summed cross-entropy at `params` to
/// `grad`. With sigmoid outputs the output pre-activation gradient is
/// `y_hat - y`.
pub fn accumulate_gradient(params: &Params, d: Dims, x: &[f64], y: &[f64], grad: &mut Params) {
    let (hidden, out) = forward_params(params, d, x);
    let mut back = vec![0.0; d.hidden];
    for o in 0..d.output {
        let delta = out[o] - y[o];
        grad.b2[o] += delta;
        let row = &params.w2[o * d.hidden..(o + 1) * d.hidden];
        let grow = &mut grad.w2[o * d.hidden..(o + 1) * d.hidden];
        for h in 0..d.hidden {
            grow[h] += delta * hidden[h];
            back[h] += row[h] * delta;
        }
    }
    for h in 0..d.hidden {
        back[h] *= hidden[h] * (1.0 - hidden[h]);
        grad.b1[h] += back[h];
    }
    for (i, &xi) in x.iter().enumerate() {
        if xi != 0.0 {
            let gcol = &mut grad.w1[i * d.hidden..(i + 1) * d.hidden];
            for (g, &b) in gcol.iter_mut().zip(&back) {
                *g += xi * b;
            }
        }
    }
}

pub fn gradient(params: &Params, d: Dims, x: &[f64], y: &[f64]) -> Params {
    let mut g = Params::zeros(d);
    accumulate_gradient(params, d, x, y, &mut g);
    g
}

/// Network weights, momentum velocities and training hyperparameters: the
/// learner's entire state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    pub dims: Dims,
    pub hyper: Hyper,
    pub params: Params,
    pub velocity: Params,
}

impl LearnerState {
    /// Weights uniform in `[-init_scale, init_scale]`, biases and velocities
    /// zero.
    pub fn init(dims: Dims, hyper: Hyper, seed: u64, init_scale: f64) -> Result<Self> {
        if !(init_scale >= 0.0 && init_scale.is_finite()) {
            return Err(Error::InvalidArgument(
                "init_scale must be finite and >= 0".into(),
            ));
        }
        let mut rng = rng::rng_from_seed(seed);
        let mut params = Params::zeros(dims);
        for w in params.w1.iter_mut().chain(params.w2.iter_mut()) {
            *w = (2.0 * rng.random::<f64>() - 1.0) * init_scale;
        }
        Ok(Self {
            dims,
            hyper,
            params,
            velocity: Params::zeros(dims),
        })
    }

    /// The reading network with default hyperparameters and init scale.
    pub fn reading(seed: u64) -> Self {
        Self::init(Dims::READING, Hyper::default(), seed, DEFAULT_INIT_SCALE)
            .expect("default init scale is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !self.params.matches(self.dims) {
            return Err(Error::Shape {
                expected: self.dims.param_count(),
                actual: self.params.len(),
            });
        }
        if !self.velocity.matches(self.dims) {
            return Err(Error::Shape {
                expected: self.dims.param_count(),
                actual: self.velocity.len(),
            });
        }
        if !self.params.all_finite() || !self.velocity.all_finite() {
            return Err(Error::NonFinite("learner state"));
        }
        Ok(())
    }

    /// Output activations `y_hat` for input `x`.
    pub fn activations(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let out = forward_params(&self.params, self.dims, x).1;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("forward pass"));
        }
        Ok(out)
    }

    pub fn loss(&self, x: &[f64], y: &[f64]) -> f64 {
        loss(&self.params, self.dims, x, y)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dims.input {
            return Err(Error::Shape {
                expected: self.dims.input,
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn check_example(&self, x: &[f64], y: &[f64]) -> Result<()> {
        self.check_input(x)?;
        if y.len() != self.dims.output {
            return Err(Error::Shape {
                expected: self.dims.output,
                actual: y.len(),
            });
        }
        Ok(())
    }

    /// One online Nesterov step on the summed cross-entropy of `(x, y)`:
    /// `v <- mu v - lr grad L(w + mu v)`, `w <- w + v`.
    ///
    /// Shapes are not re-checked here; see [`LearnerState::check_example`].
    pub fn train_step(&mut self, x: &[f64], y: &[f64]) {
        self.train_many(std::iter::once((x, y)));
    }

    /// Consecutive [`LearnerState::train_step`]s over `examples`.
    ///
    /// First-layer rows whose input unit is off get a zero gradient, so their
    /// update is a pure momentum decay. That decay is deferred until the row
    /// is next active (or the stream ends) and applied in closed form:
    /// after `n` idle steps `w += (mu + ... + mu^n) v` and `v *= mu^n`.
    /// The result equals the step-by-step recurrence up to rounding.
    pub fn train_many<'a, I>(&mut self, examples: I)
    where
        I: IntoIterator<Item = (&'a [f64], &'a [f64])>,
    {
        let examples: Vec<(&[f64], &[f64])> = examples.into_iter().collect();
        #[cfg(target_arch = "x86_64")]
        {
            if std::arch::is_x86_feature_detected!("avx2") {
                // SAFETY: the required CPU feature was just detected.
                unsafe { self.train_kernel_avx2(&examples) };
                return;
            }
        }
        self.train_kernel(&examples);
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn train_kernel_avx2(&mut self, examples: &[(&[f64], &[f64])]) {
        self.train_kernel(examples);
    }

    // No fused multiply-add is enabled, so both dispatch targets round
    // identically.
    #[inline(always)]
    fn train_kernel(&mut self, examples: &[(&[f64], &[f64])]) {
        let d = self.dims;
        let hd = d.hidden;
        let mu = self.hyper.momentum;
        let lr = self.hyper.lr;
        let (p, v) = (&mut self.params, &mut self.velocity);

        let mut decay = Decay::new(mu);
        let mut synced = vec![0usize; d.input];
        let mut step = 0usize;
        let mut active: Vec<(usize, f64)> = Vec::with_capacity(d.input);
        let mut hidden = vec![0.0; hd];
        let mut back = vec![0.0; hd];

        for &(x, y) in examples {
            active.clear();
            active.extend(
                x.iter()
                    .enumerate()
                    .filter(|(_, &xi)| xi != 0.0)
                    .map(|(i, &xi)| (i, xi)),
            );
            for &(i, _) in &active {
                let rows = i * hd..(i + 1) * hd;
                decay.apply(step - synced[i], &mut p.w1[rows.clone()], &mut v.w1[rows]);
            }

            for ((a, b), vb) in hidden.iter_mut().zip(&p.b1).zip(&v.b1) {
                *a = b + mu * vb;
            }
            for &(i, xi) in &active {
                let w = &p.w1[i * hd..(i + 1) * hd];
                let vw = &v.w1[i * hd..(i + 1) * hd];
                for h in 0..hd {
                    hidden[h] += xi * (w[h] + mu * vw[h]);
                }
            }
            for a in &mut hidden {
                *a = sigmoid(*a);
            }

            back.fill(0.0);
            let rows = p.w2.chunks_exact_mut(hd).zip(v.w2.chunks_exact_mut(hd));
            for (o, (w, vw)) in rows.enumerate() {
                let z = p.b2[o] + mu * v.b2[o] + lookahead_dot(w, vw, mu, &hidden);
                let delta = sigmoid(z) - y[o];
                for (((wh, vh), bh), &ah) in w
                    .iter_mut()
                    .zip(vw.iter_mut())
                    .zip(back.iter_mut())
                    .zip(&hidden)
                {
                    *bh += (*wh + mu * *vh) * delta;
                    *vh = mu * *vh - lr * (delta * ah);
                    *wh += *vh;
                }
                v.b2[o] = mu * v.b2[o] - lr * delta;
                p.b2[o] += v.b2[o];
            }
            for h in 0..hd {
                back[h] *= hidden[h] * (1.0 - hidden[h]);
                v.b1[h] = mu * v.b1[h] - lr * back[h];
                p.b1[h] += v.b1[h];
            }
            step += 1;
            for &(i, xi) in &active {
                let w = &mut p.w1[i * hd..(i + 1) * hd];
                let vw = &mut v.w1[i * hd..(i + 1) * hd];
                for h in 0..hd {
                    vw[h] = mu * vw[h] - lr * (xi * back[h]);
                    w[h] += vw[h];
                }
                synced[i] = step;
            }
        }
        for (i, &s) in synced.iter().enumerate() {
            let rows = i * hd..(i + 1) * hd;
            decay.apply(step - s, &mut p.w1[rows.clone()], &mut v.w1[rows]);
        }
    }

    /// Functional form of [`LearnerState::train_step`].
    pub fn stepped(&self, x: &[f64], y: &[f64]) -> Self {
        let mut next = self.clone();
        next.train_step(x, y);
        next
    }
}

/// `sum_h (w[h] + mu v[h]) a[h]`, accumulated in four interleaved lanes.
#[inline(always)]
fn lookahead_dot(w: &[f64], v: &[f64], mu: f64, a: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (wc, vc, ac) = (w.chunks_exact(4), v.chunks_exact(4), a.chunks_exact(4));
    let tail: f64 = wc
        .remainder()
        .iter()
        .zip(vc.remainder())
        .zip(ac.remainder())
        .map(|((wi, vi), ai)| (wi + mu * vi) * ai)
        .sum();
    for ((wq, vq), aq) in wc.zip(vc).zip(ac) {
        for l in 0..4 {
            acc[l] += (wq[l] + mu * vq[l]) * aq[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Closed-form momentum decay over `n` idle steps, with memoized powers.
struct Decay {
    mu: f64,
    /// `pow[n] = mu^n`
    pow: Vec<f64>,
    /// `sum[n] = mu + mu^2 + ... + mu^n`
    sum: Vec<f64>,
}

impl Decay {
    fn new(mu: f64) -> Self {
        Self {
            mu,
            pow: vec![1.0],
            sum: vec![0.0],
        }
    }

    fn apply(&mut self, n: usize, w: &mut [f64], v: &mut [f64]) {
        if n == 0 {
            return;
        }
        while self.pow.len() <= n {
            let next = self.pow[self.pow.len() - 1] * self.mu;
            self.pow.push(next);
            let s = self.sum[self.sum.len() - 1] + next;
            self.sum.push(s);
        }
        let (k, s) = (self.pow[n], self.sum[n]);
        for (wi, vi) in w.iter_mut().zip(v.iter_mut()) {
            *wi += s * *vi;
            *vi *= k;
        }
    }
}
