//! Skip-gram with negative sampling.
//!
//! For a center vector `v`, an observed context vector `u_o` and sampled
//! negatives `u_k`, the per-pair loss is
//! `-ln σ(u_o·v) - Σ_k ln σ(-u_k·v)` and SGD moves each parameter by
//! `-lr * ∂loss/∂θ`.

use std::cell::Cell;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EmbeddingMatrix, Vocabulary};
use crate::error::{Error, Result};

const TABLE_SIZE: usize = 10_000_000;
const UNIGRAM_POWER: f64 = 0.75;
const INIT_STREAM: u64 = 0x1d;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dimension: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    /// Frequent-word subsampling threshold; 0 disables subsampling.
    pub subsample: f64,
    pub seed: u64,
    /// 1 is deterministic; more workers share parameters without locking.
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dimension: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_learning_rate: 1e-4,
            subsample: 1e-3,
            seed: 1,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(m.to_string()));
        if self.dimension < 2 {
            return bad("dimension must be >= 2");
        }
        if self.window == 0 || self.negatives == 0 || self.epochs == 0 || self.workers == 0 {
            return bad("window, negatives, epochs and workers must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.min_learning_rate > 0.0) {
            return bad("learning rates must be positive");
        }
        if !(self.subsample >= 0.0) {
            return bad("subsample threshold must be >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    /// Mean per-target loss of each epoch.
    pub epoch_mean_loss: Vec<f64>,
    pub words_processed: u64,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `-∂loss/∂(u·v)` for one target: `label - σ(u·v)`.
#[inline]
fn step_coefficient(dot: f64, positive: bool) -> f64 {
    (positive as u8 as f64) - sigmoid(dot)
}

#[inline]
fn target_loss(dot: f64, positive: bool) -> f64 {
    if positive {
        softplus(-dot)
    } else {
        softplus(dot)
    }
}

fn dot64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Loss of one (center, context, negatives) triple.
pub fn sgns_loss(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> f64 {
    target_loss(dot64(center, context), true)
        + negatives
            .iter()
            .map(|n| target_loss(dot64(center, n), false))
            .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradient {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Analytic gradient of [`sgns_loss`].
pub fn sgns_gradient(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> SgnsGradient {
    let mut g_center = vec![0.0; center.len()];
    let mut targets = Vec::with_capacity(negatives.len() + 1);
    targets.push((context, true));
    targets.extend(negatives.iter().map(|n| (n.as_slice(), false)));
    let mut grads = Vec::with_capacity(targets.len());
    for (u, positive) in targets {
        let d_dot = -step_coefficient(dot64(center, u), positive);
        for (g, x) in g_center.iter_mut().zip(u) {
            *g += d_dot * x;
        }
        grads.push(center.iter().map(|x| d_dot * x).collect::<Vec<_>>());
    }
    let context = grads.remove(0);
    SgnsGradient {
        center: g_center,
        context,
        negatives: grads,
    }
}

/// Parameter storage for the training loop: plain cells when one thread
/// trains, relaxed atomics when several share the matrices.
trait Params {
    fn get(&self, i: usize) -> f32;
    fn add(&self, i: usize, delta: f32);
}

impl Params for [Cell<f32>] {
    #[inline]
    fn get(&self, i: usize) -> f32 {
        self[i].get()
    }
    #[inline]
    fn add(&self, i: usize, delta: f32) {
        self[i].set(self[i].get() + delta);
    }
}

impl Params for [AtomicU32] {
    #[inline]
    fn get(&self, i: usize) -> f32 {
        f32::from_bits(self[i].load(Ordering::Relaxed))
    }
    #[inline]
    fn add(&self, i: usize, delta: f32) {
        let v = f32::from_bits(self[i].load(Ordering::Relaxed)) + delta;
        self[i].store(v.to_bits(), Ordering::Relaxed);
    }
}

fn unigram_table(vocab: &Vocabulary) -> Vec<u32> {
    let weights: Vec<f64> = vocab
        .counts()
        .iter()
        .map(|&c| (c as f64).powf(UNIGRAM_POWER))
        .collect();
    let total: f64 = weights.iter().sum();
    let mut table = Vec::with_capacity(TABLE_SIZE);
    let mut id = 0usize;
    let mut cumulative = weights[0] / total;
    for slot in 0..TABLE_SIZE {
        table.push(id as u32);
        if (slot + 1) as f64 / TABLE_SIZE as f64 > cumulative && id + 1 < weights.len() {
            id += 1;
            cumulative += weights[id] / total;
        }
    }
    table
}

struct Shared<'a> {
    config: &'a TrainConfig,
    table: Vec<u32>,
    keep_prob: Vec<f64>,
    total_steps: f64,
    processed: AtomicU64,
}

impl Shared<'_> {
    fn learning_rate(&self) -> f64 {
        let progress = self.processed.load(Ordering::Relaxed) as f64 / self.total_steps;
        let c = self.config;
        (c.learning_rate - (c.learning_rate - c.min_learning_rate) * progress)
            .max(c.min_learning_rate)
    }

    /// One pass over `streams`; returns (loss sum, target count).
    fn run_epoch<P: Params + ?Sized>(
        &self,
        input: &P,
        output: &P,
        streams: &[Vec<u32>],
        rng: &mut ChaCha8Rng,
        neu1e: &mut [f32],
    ) -> (f64, u64) {
        let dim = self.config.dimension;
        let mut loss = 0.0;
        let mut targets = 0u64;
        let mut sentence = Vec::new();
        for stream in streams {
            sentence.clear();
            for &w in stream {
                let p = self.keep_prob[w as usize];
                if p >= 1.0 || rng.random::<f64>() < p {
                    sentence.push(w);
                }
            }
            for pos in 0..sentence.len() {
                let lr = self.learning_rate() as f32;
                let span = rng.random_range(1..=self.config.window);
                let lo = pos.saturating_sub(span);
                let hi = (pos + span).min(sentence.len() - 1);
                let center = sentence[pos] as usize * dim;
                for ctx_pos in lo..=hi {
                    if ctx_pos == pos {
                        continue;
                    }
                    let context = sentence[ctx_pos];
                    neu1e.iter_mut().for_each(|x| *x = 0.0);
                    for k in 0..=self.config.negatives {
                        let (target, positive) = if k == 0 {
                            (context, true)
                        } else {
                            let t = self.table[rng.random_range(0..self.table.len())];
                            if t == context {
                                continue;
                            }
                            (t, false)
                        };
                        let t_off = target as usize * dim;
                        let mut dot = 0.0f32;
                        for d in 0..dim {
                            dot += input.get(center + d) * output.get(t_off + d);
                        }
                        loss += target_loss(dot as f64, positive);
                        targets += 1;
                        let g = step_coefficient(dot as f64, positive) as f32 * lr;
                        for d in 0..dim {
                            neu1e[d] += g * output.get(t_off + d);
                            output.add(t_off + d, g * input.get(center + d));
                        }
                    }
                    for (d, &delta) in neu1e.iter().enumerate() {
                        input.add(center + d, delta);
                    }
                }
                self.processed.fetch_add(1, Ordering::Relaxed);
            }
        }
        (loss, targets)
    }
}

fn initial_input(vocab_len: usize, config: &TrainConfig) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(INIT_STREAM);
    let scale = 1.0 / config.dimension as f32;
    (0..vocab_len * config.dimension)
        .map(|_| (rng.random::<f32>() - 0.5) * scale)
        .collect()
}

fn worker_rng(seed: u64, worker: usize, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((epoch as u64) << 16) | worker as u64);
    rng
}

pub fn train<S: AsRef<[String]>>(
    streams: &[S],
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<EmbeddingMatrix> {
    train_with_stats(streams, vocab, config).map(|(m, _)| m)
}

pub fn train_with_stats<S: AsRef<[String]>>(
    streams: &[S],
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<(EmbeddingMatrix, TrainStats)> {
    config.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let encoded: Vec<Vec<u32>> = streams
        .iter()
        .map(|s| vocab.encode(s.as_ref()))
        .filter(|s| s.len() > 1)
        .collect();
    let total_words: u64 = encoded.iter().map(|s| s.len() as u64).sum();
    let vocab_total = vocab.total_count().max(1) as f64;
    let keep_prob = vocab
        .counts()
        .iter()
        .map(|&c| {
            if config.subsample <= 0.0 {
                1.0
            } else {
                (config.subsample / (c as f64 / vocab_total)).sqrt().min(1.0)
            }
        })
        .collect();
    let shared = Shared {
        config,
        table: unigram_table(vocab),
        keep_prob,
        total_steps: (total_words * config.epochs as u64).max(1) as f64,
        processed: AtomicU64::new(0),
    };
    let dim = config.dimension;
    let mut input = initial_input(vocab.len(), config);
    let mut output = vec![0.0f32; vocab.len() * dim];
    let mut stats = TrainStats::default();

    if config.workers == 1 {
        let in_cells = Cell::from_mut(&mut input[..]).as_slice_of_cells();
        let out_cells = Cell::from_mut(&mut output[..]).as_slice_of_cells();
        let mut neu1e = vec![0.0f32; dim];
        for epoch in 0..config.epochs {
            let mut rng = worker_rng(config.seed, 0, epoch);
            let (loss, n) = shared.run_epoch(in_cells, out_cells, &encoded, &mut rng, &mut neu1e);
            stats.epoch_mean_loss.push(loss / n.max(1) as f64);
        }
    } else {
        let to_atomic = |v: &[f32]| v.iter().map(|x| AtomicU32::new(x.to_bits())).collect::<Vec<_>>();
        let in_atomic = to_atomic(&input);
        let out_atomic = to_atomic(&output);
        let chunk = encoded.len().div_ceil(config.workers).max(1);
        for epoch in 0..config.epochs {
            let results: Vec<(f64, u64)> = std::thread::scope(|scope| {
                let handles: Vec<_> = encoded
                    .chunks(chunk)
                    .enumerate()
                    .map(|(w, shard)| {
                        let shared = &shared;
                        let (inp, out) = (&in_atomic[..], &out_atomic[..]);
                        scope.spawn(move || {
                            let mut rng = worker_rng(config.seed, w, epoch);
                            let mut neu1e = vec![0.0f32; dim];
                            shared.run_epoch(inp, out, shard, &mut rng, &mut neu1e)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            });
            let (loss, n) = results
                .iter()
                .fold((0.0, 0u64), |acc, r| (acc.0 + r.0, acc.1 + r.1));
            stats.epoch_mean_loss.push(loss / n.max(1) as f64);
        }
        let from_atomic = |v: Vec<AtomicU32>| v.into_iter().map(|a| f32::from_bits(a.into_inner())).collect();
        input = from_atomic(in_atomic);
        output = from_atomic(out_atomic);
    }
    stats.words_processed = shared.processed.load(Ordering::Relaxed);
    Ok((EmbeddingMatrix::with_output(dim, input, output)?, stats))
}
