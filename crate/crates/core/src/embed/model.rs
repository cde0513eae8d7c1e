use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{empty_vocab_error, EmbedCorpus, EmbedVocab, Vectors};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    /// Context tokens on each side of the center; never crosses a document.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Decays linearly to 0 over all epochs.
    pub initial_lr: f64,
    /// Frequent-token subsampling threshold; 0 disables.
    pub subsample_threshold: f64,
    /// Character n-gram lengths `(min, max)`; `None` trains plain token
    /// vectors.
    pub subword_ngrams: Option<(usize, usize)>,
    /// Size of the hashed n-gram space. Only buckets some token uses get a
    /// row.
    pub buckets: u32,
    pub min_token_count: u64,
    pub seed: u64,
    /// Pairs per entry of the loss trace.
    pub trace_every: u64,
    /// Log one line per epoch to stderr.
    pub verbose: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            window: 2,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            subsample_threshold: 1e-4,
            subword_ngrams: None,
            buckets: 1 << 21,
            min_token_count: 1,
            seed: 1,
            trace_every: 10_000,
            verbose: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Validation(msg.to_string()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.negatives == 0 {
            return bad("negatives must be at least 1");
        }
        if !(self.initial_lr.is_finite() && self.initial_lr > 0.0) {
            return bad("learning rate must be positive");
        }
        if !(self.subsample_threshold.is_finite() && self.subsample_threshold >= 0.0) {
            return bad("subsample threshold must be non-negative");
        }
        if let Some((lo, hi)) = self.subword_ngrams {
            if lo == 0 || lo > hi {
                return bad("subword n-gram range must satisfy 1 <= min <= max");
            }
            if self.buckets == 0 {
                return bad("bucket count must be positive");
            }
        }
        if self.trace_every == 0 {
            return bad("trace interval must be positive");
        }
        Ok(())
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `ln(sigmoid(x))` without overflow for large `|x|`.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Character n-grams of `<token>`, excluding the whole bracketed string
/// and the bare markers.
pub fn subword_ngrams(token: &str, min: usize, max: usize) -> Vec<String> {
    let chars: Vec<char> = std::iter::once('<')
        .chain(token.chars())
        .chain(std::iter::once('>'))
        .collect();
    let len = chars.len();
    let mut out = Vec::new();
    for i in 0..len {
        for n in min..=max {
            if i + n > len {
                break;
            }
            if n == len || (n == 1 && (i == 0 || i == len - 1)) {
                continue;
            }
            out.push(chars[i..i + n].iter().collect());
        }
    }
    out
}

fn fnv1a(s: &str) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for b in s.bytes() {
        h ^= u32::from(b);
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

/// Draws token ids with probability proportional to `count^power`.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    dist: WeightedIndex<f64>,
    weights: Vec<f64>,
}

impl NegativeSampler {
    pub const POWER: f64 = 0.75;

    pub fn new(counts: &[u64], power: f64) -> Result<Self> {
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(power)).collect();
        let dist = WeightedIndex::new(&weights).map_err(|_| empty_vocab_error())?;
        Ok(NegativeSampler { dist, weights })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> u32 {
        self.dist.sample(rng) as u32
    }

    /// Redraws until the result differs from `positive`. Needs at least two
    /// tokens with non-zero weight.
    pub fn draw_excluding<R: Rng>(&self, rng: &mut R, positive: u32) -> u32 {
        loop {
            let t = self.draw(rng);
            if t != positive {
                return t;
            }
        }
    }
}

/// Loss gradient of one (center, context, negatives) update, by parameter
/// row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairGradient {
    pub input: BTreeMap<usize, Vec<f64>>,
    pub output: BTreeMap<usize, Vec<f64>>,
}

#[derive(Debug, Default)]
struct Scratch {
    h: Vec<f64>,
    grad_h: Vec<f64>,
    coef: Vec<(u32, f64)>,
}

/// Input rows (tokens, then occupied n-gram buckets) and output rows
/// (tokens). A token's input representation is the mean of its own row and
/// its n-gram rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    vocab: EmbedVocab,
    dim: usize,
    input: Vec<f64>,
    output: Vec<f64>,
    subwords: Vec<Vec<u32>>,
}

impl EmbeddingMatrix {
    /// Input rows uniform in `±0.5 / dim`, output rows zero.
    pub fn new(vocab: EmbedVocab, config: &TrainConfig, rng: &mut impl Rng) -> Result<Self> {
        config.validate()?;
        if vocab.is_empty() {
            return Err(empty_vocab_error());
        }
        let dim = config.dim;
        let (subwords, bucket_rows) = match config.subword_ngrams {
            None => (vec![Vec::new(); vocab.len()], 0),
            Some((lo, hi)) => {
                let hashed: Vec<Vec<u32>> = vocab
                    .tokens()
                    .iter()
                    .map(|t| {
                        subword_ngrams(t, lo, hi)
                            .iter()
                            .map(|g| fnv1a(g) % config.buckets)
                            .collect()
                    })
                    .collect();
                let mut used: Vec<u32> = hashed.iter().flatten().copied().collect();
                used.sort_unstable();
                used.dedup();
                let base = vocab.len() as u32;
                let rows = hashed
                    .into_iter()
                    .map(|buckets| {
                        buckets
                            .into_iter()
                            .map(|b| base + used.binary_search(&b).expect("collected above") as u32)
                            .collect()
                    })
                    .collect();
                (rows, used.len())
            }
        };
        let rows = vocab.len() + bucket_rows;
        let bound = 0.5 / dim as f64;
        let input = (0..rows * dim)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        let output = vec![0.0; vocab.len() * dim];
        Ok(EmbeddingMatrix {
            vocab,
            dim,
            input,
            output,
            subwords,
        })
    }

    pub fn vocab(&self) -> &EmbedVocab {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input_rows(&self) -> usize {
        self.input.len() / self.dim
    }

    pub fn input(&self) -> &[f64] {
        &self.input
    }

    pub fn input_mut(&mut self) -> &mut [f64] {
        &mut self.input
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }

    pub fn output_mut(&mut self) -> &mut [f64] {
        &mut self.output
    }

    /// Input rows averaged into `token`'s representation, its own first.
    pub fn rows_of(&self, token: u32) -> Vec<usize> {
        std::iter::once(token as usize)
            .chain(self.subwords[token as usize].iter().map(|&r| r as usize))
            .collect()
    }

    fn compose_into(&self, token: u32, h: &mut Vec<f64>) {
        let d = self.dim;
        h.clear();
        h.extend_from_slice(&self.input[token as usize * d..][..d]);
        let extra = &self.subwords[token as usize];
        if extra.is_empty() {
            return;
        }
        for &r in extra {
            axpy(1.0, &self.input[r as usize * d..][..d], h);
        }
        let scale = 1.0 / (extra.len() + 1) as f64;
        h.iter_mut().for_each(|x| *x *= scale);
    }

    pub fn token_vector(&self, token: u32) -> Vec<f64> {
        let mut h = Vec::with_capacity(self.dim);
        self.compose_into(token, &mut h);
        h
    }

    /// Composed input vector of every vocabulary token.
    pub fn to_vectors(&self) -> Vectors {
        let mut v = Vectors::new(self.dim);
        let mut h = Vec::with_capacity(self.dim);
        for (i, t) in self.vocab.tokens().iter().enumerate() {
            self.compose_into(i as u32, &mut h);
            v.push(t.clone(), &h)
                .expect("vocabulary tokens are distinct");
        }
        v
    }

    fn output_row(&self, t: u32) -> &[f64] {
        &self.output[t as usize * self.dim..][..self.dim]
    }

    /// `-ln σ(h·u_context) - Σ ln σ(-h·u_neg)`.
    pub fn pair_loss(&self, center: u32, context: u32, negatives: &[u32]) -> f64 {
        let h = self.token_vector(center);
        -log_sigmoid(dot(&h, self.output_row(context)))
            - negatives
                .iter()
                .map(|&n| log_sigmoid(-dot(&h, self.output_row(n))))
                .sum::<f64>()
    }

    pub fn pair_gradient(&self, center: u32, context: u32, negatives: &[u32]) -> PairGradient {
        let d = self.dim;
        let h = self.token_vector(center);
        let mut grad_h = vec![0.0; d];
        let mut grad = PairGradient::default();
        let targets = std::iter::once((context, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
        for (t, label) in targets {
            let u = self.output_row(t);
            let g = sigmoid(dot(&h, u)) - label;
            axpy(g, u, &mut grad_h);
            let row = grad
                .output
                .entry(t as usize)
                .or_insert_with(|| vec![0.0; d]);
            axpy(g, &h, row);
        }
        let rows = self.rows_of(center);
        let scale = 1.0 / rows.len() as f64;
        for r in rows {
            let row = grad.input.entry(r).or_insert_with(|| vec![0.0; d]);
            axpy(scale, &grad_h, row);
        }
        grad
    }

    /// One gradient descent step on the pair loss; returns the loss before
    /// the step. All terms use the parameters as they were before the step.
    pub fn sgd_step(&mut self, center: u32, context: u32, negatives: &[u32], lr: f64) -> f64 {
        self.step(center, context, negatives, lr, &mut Scratch::default())
    }

    fn step(
        &mut self,
        center: u32,
        context: u32,
        negatives: &[u32],
        lr: f64,
        s: &mut Scratch,
    ) -> f64 {
        let d = self.dim;
        let mut h = std::mem::take(&mut s.h);
        self.compose_into(center, &mut h);
        s.grad_h.clear();
        s.grad_h.resize(d, 0.0);
        s.coef.clear();
        let mut loss = 0.0;
        let targets = std::iter::once((context, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
        for (t, label) in targets {
            let u = self.output_row(t);
            let score = dot(&h, u);
            loss -= if label > 0.0 {
                log_sigmoid(score)
            } else {
                log_sigmoid(-score)
            };
            let g = label - sigmoid(score);
            axpy(g, u, &mut s.grad_h);
            s.coef.push((t, g));
        }
        for &(t, g) in &s.coef {
            axpy(lr * g, &h, &mut self.output[t as usize * d..][..d]);
        }
        let extra = &self.subwords[center as usize];
        let scale = lr / (extra.len() + 1) as f64;
        axpy(
            scale,
            &s.grad_h,
            &mut self.input[center as usize * d..][..d],
        );
        for &r in extra {
            axpy(scale, &s.grad_h, &mut self.input[r as usize * d..][..d]);
        }
        s.h = h;
        loss
    }
}

/// A (center, context) pair as the trainer visits it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairEvent {
    pub epoch: usize,
    pub doc: usize,
    pub center: u32,
    pub context: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Mean pair loss per epoch.
    pub epoch_losses: Vec<f64>,
    /// `(pairs so far, mean loss over the last interval)`.
    pub trace: Vec<(u64, f64)>,
    pub pairs: u64,
}

pub fn train_skipgram(
    corpus: &EmbedCorpus,
    config: &TrainConfig,
) -> Result<(EmbeddingMatrix, TrainReport)> {
    train_skipgram_observed(corpus, config, |_| {})
}

/// Single-threaded training; identical inputs and seed give bit-identical
/// results. `observer` sees every pair before its update.
pub fn train_skipgram_observed(
    corpus: &EmbedCorpus,
    config: &TrainConfig,
    mut observer: impl FnMut(PairEvent),
) -> Result<(EmbeddingMatrix, TrainReport)> {
    config.validate()?;
    let vocab = &corpus.vocab;
    let total_tokens = corpus.token_count() as u64;
    if vocab.is_empty() || total_tokens == 0 {
        return Err(empty_vocab_error());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut m = EmbeddingMatrix::new(vocab.clone(), config, &mut rng)?;
    let sampler = NegativeSampler::new(vocab.counts(), NegativeSampler::POWER)?;
    let can_sample = vocab.len() > 1;

    let keep: Vec<f64> = if config.subsample_threshold > 0.0 {
        let total = vocab.total() as f64;
        let t = config.subsample_threshold;
        vocab
            .counts()
            .iter()
            .map(|&c| {
                let f = c as f64 / total;
                ((f / t).sqrt() + 1.0) * t / f
            })
            .collect()
    } else {
        vec![1.0; vocab.len()]
    };

    let work = total_tokens * config.epochs as u64;
    let mut processed = 0u64;
    let mut report = TrainReport::default();
    let mut scratch = Scratch::default();
    let mut negatives = Vec::with_capacity(config.negatives);
    let mut kept = Vec::new();
    let (mut trace_sum, mut trace_n) = (0.0, 0u64);
    let mut lr = config.initial_lr;

    for epoch in 0..config.epochs {
        let (mut epoch_sum, mut epoch_n) = (0.0, 0u64);
        for (d, doc) in corpus.docs.iter().enumerate() {
            // (position in the document, token) of tokens surviving subsampling.
            kept.clear();
            kept.extend(doc.iter().copied().enumerate().filter(|&(_, t)| {
                let p = keep[t as usize];
                p >= 1.0 || rng.gen::<f64>() < p
            }));
            for i in 0..kept.len() {
                let (pos, center) = kept[i];
                let at = processed + pos as u64;
                lr = config.initial_lr * (1.0 - at as f64 / work as f64).max(0.0);
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window).min(kept.len() - 1);
                for (j, &(_, context)) in (lo..).zip(&kept[lo..=hi]) {
                    if j == i {
                        continue;
                    }
                    observer(PairEvent {
                        epoch,
                        doc: d,
                        center,
                        context,
                    });
                    negatives.clear();
                    if can_sample {
                        for _ in 0..config.negatives {
                            negatives.push(sampler.draw_excluding(&mut rng, context));
                        }
                    }
                    let loss = m.step(center, context, &negatives, lr, &mut scratch);
                    epoch_sum += loss;
                    epoch_n += 1;
                    trace_sum += loss;
                    trace_n += 1;
                    report.pairs += 1;
                    if trace_n == config.trace_every {
                        report
                            .trace
                            .push((report.pairs, trace_sum / trace_n as f64));
                        trace_sum = 0.0;
                        trace_n = 0;
                    }
                }
            }
            processed += doc.len() as u64;
        }
        let mean = if epoch_n > 0 {
            epoch_sum / epoch_n as f64
        } else {
            0.0
        };
        report.epoch_losses.push(mean);
        if config.verbose {
            eprintln!(
                "epoch {}/{}\tlr {:.6}\tpairs {}\tmean loss {:.6}",
                epoch + 1,
                config.epochs,
                lr,
                epoch_n,
                mean
            );
        }
    }
    if trace_n > 0 {
        report
            .trace
            .push((report.pairs, trace_sum / trace_n as f64));
    }
    Ok((m, report))
}
