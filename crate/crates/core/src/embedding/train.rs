//! Skip-gram with negative sampling, trained by asynchronous SGD.
//!
//! Workers share the parameter matrices and update them without locks.
//! Concurrent updates to the same row may overwrite each other; that loss
//! is accepted. With a single worker a run is fully determined by the seed.

use std::collections::HashSet;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};
use std::thread;

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EmbeddingModel, TrainMeta, TrainParams};
use crate::corpus::{count_terms, top_terms, Document};
use crate::error::{Error, Result};

/// Words a worker processes between updates of the shared progress counter.
const PROGRESS_STRIDE: u64 = 1_000;
const MIN_LR_FRACTION: f64 = 1e-4;

/// An `f32` matrix that many threads may read and write at once.
///
/// Relaxed atomics keep racing accesses well defined; they compile to plain
/// loads and stores.
struct SharedMatrix {
    data: Vec<AtomicU32>,
    dim: usize,
}

impl SharedMatrix {
    fn from_vec(values: Vec<f32>, dim: usize) -> Self {
        SharedMatrix {
            data: values.into_iter().map(|v| AtomicU32::new(v.to_bits())).collect(),
            dim,
        }
    }

    fn row(&self, i: usize) -> &[AtomicU32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn load_row(&self, i: usize, out: &mut [f32]) {
        for (o, a) in out.iter_mut().zip(self.row(i)) {
            *o = f32::from_bits(a.load(Ordering::Relaxed));
        }
    }

    /// `row[i] += scale * delta`
    fn add_to_row(&self, i: usize, delta: &[f32], scale: f32) {
        for (a, d) in self.row(i).iter().zip(delta) {
            let v = f32::from_bits(a.load(Ordering::Relaxed)) + scale * d;
            a.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn into_vec(self) -> Vec<f32> {
        self.data.into_iter().map(|a| f32::from_bits(a.into_inner())).collect()
    }
}

/// Samples term ids proportionally to `count^0.75`.
struct NoiseDistribution {
    cumulative: Vec<f64>,
}

impl NoiseDistribution {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NoiseDistribution { cumulative }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap();
        let x = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }
}

struct Trainer<'a> {
    params: &'a TrainParams,
    input: SharedMatrix,
    output: SharedMatrix,
    noise: NoiseDistribution,
    keep_prob: Vec<f64>,
    processed: AtomicU64,
    /// epochs * training tokens
    total_work: u64,
}

impl Trainer<'_> {
    fn learning_rate(&self, processed: u64) -> f32 {
        let lr0 = self.params.initial_lr;
        let progress = processed as f64 / (self.total_work as f64 + 1.0);
        (lr0 * (1.0 - progress).max(MIN_LR_FRACTION)) as f32
    }

    fn run_worker(&self, shard: &[Vec<u32>], seed: u64) {
        let dim = self.params.vector_size;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hidden = vec![0f32; dim];
        let mut out_row = vec![0f32; dim];
        let mut grad = vec![0f32; dim];
        let mut kept = Vec::new();
        let mut pending = 0u64;
        let mut lr = self.learning_rate(self.processed.load(Ordering::Relaxed));

        for _ in 0..self.params.epochs {
            for doc in shard {
                kept.clear();
                for &w in doc {
                    pending += 1;
                    if pending >= PROGRESS_STRIDE {
                        let done = self.processed.fetch_add(pending, Ordering::Relaxed) + pending;
                        pending = 0;
                        lr = self.learning_rate(done);
                    }
                    let p = self.keep_prob[w as usize];
                    if p >= 1.0 || rng.random::<f64>() < p {
                        kept.push(w as usize);
                    }
                }

                for (pos, &center) in kept.iter().enumerate() {
                    let radius = rng.random_range(1..=self.params.context);
                    let lo = pos.saturating_sub(radius);
                    let hi = (pos + radius).min(kept.len() - 1);
                    for (cpos, &context) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                        if cpos == pos {
                            continue;
                        }
                        self.train_pair(
                            center,
                            context,
                            lr,
                            &mut rng,
                            &mut hidden,
                            &mut out_row,
                            &mut grad,
                        );
                    }
                }
            }
        }
        self.processed.fetch_add(pending, Ordering::Relaxed);
    }

    /// One SGD step: the center word's input vector predicts `context`
    /// against `negatives` noise words.
    #[allow(clippy::too_many_arguments)]
    fn train_pair(
        &self,
        center: usize,
        context: usize,
        lr: f32,
        rng: &mut ChaCha8Rng,
        hidden: &mut [f32],
        out_row: &mut [f32],
        grad: &mut [f32],
    ) {
        self.input.load_row(center, hidden);
        grad.iter_mut().for_each(|g| *g = 0.0);
        for d in 0..=self.params.negatives {
            let (target, label) = if d == 0 {
                (context, 1.0f32)
            } else {
                let t = self.noise.sample(rng);
                if t == context {
                    continue;
                }
                (t, 0.0)
            };
            self.output.load_row(target, out_row);
            let f: f32 = hidden.iter().zip(out_row.iter()).map(|(a, b)| a * b).sum();
            let g = (label - sigmoid(f)) * lr;
            for (ge, o) in grad.iter_mut().zip(out_row.iter()) {
                *ge += g * o;
            }
            self.output.add_to_row(target, hidden, g);
        }
        self.input.add_to_row(center, grad, 1.0);
    }
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

/// Splits documents into `n` contiguous shards of roughly equal token count.
fn shard(docs: &[Vec<u32>], n: usize) -> Vec<&[Vec<u32>]> {
    let total: usize = docs.iter().map(Vec::len).sum();
    let per = total.div_ceil(n).max(1);
    let mut shards = Vec::with_capacity(n);
    let mut start = 0;
    let mut acc = 0;
    for (i, d) in docs.iter().enumerate() {
        acc += d.len();
        if acc >= per && shards.len() + 1 < n {
            shards.push(&docs[start..=i]);
            start = i + 1;
            acc = 0;
        }
    }
    shards.push(&docs[start..]);
    shards.retain(|s| !s.is_empty());
    shards
}

/// Trains skip-gram vectors on tokenized documents.
///
/// Terms occurring fewer than `min_count` times are dropped from the
/// documents before training. The window radius at each position is drawn
/// uniformly from `1..=context`, frequent words are subsampled, and the
/// learning rate decays linearly to `initial_lr * 1e-4` over all epochs.
/// The returned model holds the input-side vectors.
pub fn train(documents: &[Document], params: &TrainParams) -> Result<EmbeddingModel> {
    params.validate()?;
    let vocab = count_terms(documents, &HashSet::new(), params.min_count)?;
    if vocab.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let terms = top_terms(&vocab, vocab.len());
    let index: std::collections::HashMap<&str, u32> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i as u32))
        .collect();
    let counts: Vec<u64> = terms.iter().map(|t| vocab.entries[t]).collect();

    let encoded: Vec<Vec<u32>> = documents
        .iter()
        .map(|d| d.tokens.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .filter(|d: &Vec<u32>| !d.is_empty())
        .collect();
    let train_tokens: u64 = encoded.iter().map(|d| d.len() as u64).sum();
    if train_tokens == 0 {
        return Err(Error::EmptyCorpus);
    }

    let keep_prob = counts
        .iter()
        .map(|&c| {
            if params.subsample <= 0.0 {
                return 1.0;
            }
            let thr = params.subsample * train_tokens as f64;
            let c = c as f64;
            ((c / thr).sqrt() + 1.0) * thr / c
        })
        .collect();

    let dim = params.vector_size;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let init: Vec<f32> = (0..terms.len() * dim)
        .map(|_| (rng.random::<f32>() - 0.5) / dim as f32)
        .collect();

    let trainer = Trainer {
        params,
        input: SharedMatrix::from_vec(init, dim),
        output: SharedMatrix::from_vec(vec![0.0; terms.len() * dim], dim),
        noise: NoiseDistribution::new(&counts),
        keep_prob,
        processed: AtomicU64::new(0),
        total_work: train_tokens * params.epochs as u64,
    };

    let shards = shard(&encoded, params.workers);
    info!(
        "training {} terms x {} dims on {} tokens, {} epochs, {} worker(s)",
        terms.len(),
        dim,
        train_tokens,
        params.epochs,
        shards.len()
    );
    if shards.len() == 1 {
        trainer.run_worker(shards[0], params.seed.wrapping_add(1));
    } else {
        thread::scope(|s| {
            for (w, sh) in shards.iter().enumerate() {
                let trainer = &trainer;
                let seed = params.seed.wrapping_add(1 + w as u64);
                s.spawn(move || trainer.run_worker(sh, seed));
            }
        });
    }
    debug!("processed {} words", trainer.processed.load(Ordering::Relaxed));

    let vectors = trainer.input.into_vec();
    let model = EmbeddingModel::from_vectors(terms, dim, vectors)?;
    Ok(model.with_meta(TrainMeta {
        params: params.clone(),
        vocab,
    }))
}
