use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::step::{as_atomic, as_cells, knet_step, skipgram_step, Freeze, Params, Scratch, Slot};
use super::{buckets_for, EmbeddingModel, TrainingConfig};
use crate::corpus::{NoiseTable, TokenStream, Vocabulary};
use crate::error::{Error, Result};
use crate::relation::RelationMatrix;

/// Final learning rate as a fraction of the initial one.
const LR_FLOOR: f64 = 1e-4;

/// How many tokens a worker processes between progress updates in the
/// shared mode.
const PROGRESS_CHUNK: u64 = 1024;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Number of (input, context) updates performed.
    pub steps: u64,
    /// Mean negative objective per step, one entry per epoch.
    pub epoch_losses: Vec<f64>,
    /// Wall-clock seconds per epoch.
    pub epoch_seconds: Vec<f64>,
    pub words_per_sec: f64,
}

#[derive(Clone, Debug)]
pub struct Trained {
    pub model: EmbeddingModel,
    /// The relation with trained weights; its structure is unchanged.
    pub relation: RelationMatrix,
    pub report: TrainReport,
}

/// Trains the blended-input model.
pub fn train(
    vocab: &Vocabulary,
    stream: &TokenStream,
    relation: RelationMatrix,
    config: &TrainingConfig,
) -> Result<Trained> {
    run(vocab, stream, Some(relation), config, None)
}

/// Single-threaded training that reports the negative objective of every
/// step to `observer` as `(step index, loss)`.
pub fn train_with_observer(
    vocab: &Vocabulary,
    stream: &TokenStream,
    relation: Option<RelationMatrix>,
    config: &TrainingConfig,
    observer: &mut dyn FnMut(u64, f64),
) -> Result<Trained> {
    if config.threads != 1 {
        return Err(Error::Config("per-step observation needs threads = 1".into()));
    }
    run(vocab, stream, relation, config, Some(observer))
}

/// Plain Skip-gram with negative sampling. Draws random numbers in exactly
/// the same order as [`train`], so both see the same initialization, samples
/// and noise words under one seed.
pub fn train_skipgram(
    vocab: &Vocabulary,
    stream: &TokenStream,
    config: &TrainingConfig,
) -> Result<Trained> {
    run(vocab, stream, None, config, None)
}

trait Kernel {
    fn step(&self, t: usize, targets: &[u32], lr: f64, sc: &mut Scratch) -> f64;
}

struct KnetKernel<'a, S> {
    params: Params<'a, S>,
    offsets: &'a [usize],
    neighbors: &'a [u32],
    bucket_of: &'a [u32],
    freeze: Freeze,
    /// Only sound when this kernel is the sole writer.
    reuse: bool,
}

impl<S: Slot> Kernel for KnetKernel<'_, S> {
    #[inline]
    fn step(&self, t: usize, targets: &[u32], lr: f64, sc: &mut Scratch) -> f64 {
        knet_step(
            self.params,
            self.offsets,
            self.neighbors,
            self.bucket_of[t] as usize,
            t,
            targets,
            lr,
            self.freeze,
            self.reuse,
            sc,
        )
    }
}

struct SkipKernel<'a, S> {
    dim: usize,
    input: &'a [S],
    output: &'a [S],
}

impl<S: Slot> Kernel for SkipKernel<'_, S> {
    #[inline]
    fn step(&self, t: usize, targets: &[u32], lr: f64, sc: &mut Scratch) -> f64 {
        skipgram_step(self.input, self.output, self.dim, t, targets, lr, sc)
    }
}

struct Plan<'a> {
    tokens: &'a [u32],
    noise: &'a NoiseTable,
    config: &'a TrainingConfig,
    /// Tokens over the whole run, used for the learning-rate schedule.
    total_words: u64,
}

/// Learning rate after `processed` of `total` tokens.
fn learning_rate(lr: f64, processed: u64, total: u64) -> f64 {
    let progress = (processed as f64 / total.max(1) as f64).min(1.0);
    lr * (1.0 - (1.0 - LR_FLOOR) * progress)
}

/// Trains over `tokens` (one shard of one epoch). `done` counts tokens
/// already processed across all shards; returns (steps, loss sum).
#[allow(clippy::too_many_arguments)]
fn run_shard<K: Kernel + ?Sized>(
    plan: &Plan<'_>,
    kernel: &K,
    tokens: &[u32],
    rng: &mut ChaCha8Rng,
    progress: &AtomicU64,
    first_step: u64,
    observer: &mut Option<&mut dyn FnMut(u64, f64)>,
) -> Result<(u64, f64)> {
    let cfg = plan.config;
    let mut sc = Scratch::new(cfg.dim);
    let mut targets = vec![0u32; cfg.negatives + 1];
    let mut steps = 0u64;
    let mut loss = 0.0;
    let mut processed = progress.load(Ordering::Relaxed);
    let mut unreported = 0u64;
    let n = tokens.len();
    for pos in 0..n {
        let lr = learning_rate(cfg.lr, processed, plan.total_words);
        let t = tokens[pos] as usize;
        let reach = if cfg.shrink_window {
            rng.gen_range(1..=cfg.window)
        } else {
            cfg.window
        };
        let lo = pos.saturating_sub(reach);
        let hi = (pos + reach).min(n - 1);
        for (ctx, &word) in (lo..=hi).zip(&tokens[lo..=hi]) {
            if ctx == pos {
                continue;
            }
            targets[0] = word;
            for slot in &mut targets[1..] {
                *slot = plan.noise.sample(rng) as u32;
            }
            let objective = kernel.step(t, &targets, lr, &mut sc);
            let step = first_step + steps;
            if !objective.is_finite() {
                return Err(Error::NonFinite { step });
            }
            if let Some(obs) = observer.as_mut() {
                obs(step, -objective);
            }
            loss -= objective;
            steps += 1;
        }
        unreported += 1;
        processed += 1;
        if unreported == PROGRESS_CHUNK {
            processed = progress.fetch_add(unreported, Ordering::Relaxed) + unreported;
            unreported = 0;
        }
    }
    progress.fetch_add(unreported, Ordering::Relaxed);
    Ok((steps, loss))
}

/// Frequent-word subsampling: keeps a token with probability
/// `(sqrt(f / (s·T)) + 1) · s·T / f` for word frequency `f` and corpus size `T`.
fn subsample(tokens: &[u32], vocab: &Vocabulary, s: f64, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let threshold = s * vocab.total_tokens() as f64;
    tokens
        .iter()
        .copied()
        .filter(|&t| {
            let f = vocab.count(t as usize) as f64;
            let keep = ((f / threshold).sqrt() + 1.0) * threshold / f;
            keep >= 1.0 || rng.gen::<f64>() < keep
        })
        .collect()
}

fn run(
    vocab: &Vocabulary,
    stream: &TokenStream,
    relation: Option<RelationMatrix>,
    config: &TrainingConfig,
    mut observer: Option<&mut dyn FnMut(u64, f64)>,
) -> Result<Trained> {
    config.validate()?;
    if stream.is_empty() {
        return Err(Error::Invalid("the token stream is empty".into()));
    }
    let v = vocab.len();
    if let Some(rel) = &relation {
        if rel.len() != v {
            return Err(Error::Invalid(format!(
                "relation has {} rows for a vocabulary of {v} words",
                rel.len()
            )));
        }
    }
    if stream.as_slice().iter().any(|&t| t as usize >= v) {
        return Err(Error::Invalid("token index outside the vocabulary".into()));
    }
    if config.buckets > v {
        log::warn!(
            "bucket count {} exceeds the vocabulary size; using {v}",
            config.buckets
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (bucket_of, c1, c2) = match relation {
        Some(_) => (buckets_for(vocab, config.buckets)?, config.c1_init, config.c2_init),
        None => (vec![0; v], 1.0, 0.0),
    };
    let mut model = EmbeddingModel::init(v, config.dim, bucket_of, c1, c2, &mut rng);
    let mut relation = relation;
    let noise = NoiseTable::new(vocab);
    let n = stream.len() as u64;
    let plan = Plan {
        tokens: stream.as_slice(),
        noise: &noise,
        config,
        total_words: n * config.epochs as u64,
    };
    let freeze = Freeze {
        relation: config.freeze_relation,
        coeffs: config.freeze_coeffs,
    };

    let mut report = TrainReport::default();
    let started = Instant::now();
    let progress = AtomicU64::new(0);
    for epoch in 0..config.epochs {
        let epoch_start = Instant::now();
        let owned;
        let tokens: &[u32] = if config.subsample > 0.0 {
            owned = subsample(plan.tokens, vocab, config.subsample, &mut rng);
            &owned
        } else {
            plan.tokens
        };
        // keep the schedule on the full-corpus scale when subsampling
        progress.store(epoch as u64 * n, Ordering::Relaxed);
        let first_step = report.steps;
        let (steps, loss) = if config.threads == 1 {
            run_local(&plan, &mut model, relation.as_mut(), freeze, tokens, &mut rng, &progress, first_step, &mut observer)?
        } else {
            run_shared(&plan, &mut model, relation.as_mut(), freeze, tokens, &progress, epoch, first_step)?
        };
        report.steps += steps;
        if !model.is_finite() || relation.as_ref().is_some_and(|r| r.weights().iter().any(|w| !w.is_finite())) {
            return Err(Error::NonFinite { step: report.steps });
        }
        let secs = epoch_start.elapsed().as_secs_f64();
        let mean = loss / steps.max(1) as f64;
        report.epoch_losses.push(mean);
        report.epoch_seconds.push(secs);
        log::info!(
            "epoch {}: loss {mean:.5}, {:.0} words/s",
            epoch + 1,
            tokens.len() as f64 / secs.max(1e-9)
        );
    }
    report.words_per_sec = plan.total_words as f64 / started.elapsed().as_secs_f64().max(1e-9);
    let relation = relation.unwrap_or_else(|| RelationMatrix::empty(v, crate::morphology::MorphKind::Edit, 1));
    Ok(Trained {
        model,
        relation,
        report,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_local(
    plan: &Plan<'_>,
    model: &mut EmbeddingModel,
    relation: Option<&mut RelationMatrix>,
    freeze: Freeze,
    tokens: &[u32],
    rng: &mut ChaCha8Rng,
    progress: &AtomicU64,
    first_step: u64,
    observer: &mut Option<&mut dyn FnMut(u64, f64)>,
) -> Result<(u64, f64)> {
    let dim = model.dim();
    let EmbeddingModel {
        input,
        output,
        c1,
        c2,
        bucket_of,
        ..
    } = model;
    match relation {
        Some(rel) => {
            let offsets = rel.offsets().to_vec();
            let neighbors = rel.neighbors().to_vec();
            let kernel = KnetKernel {
                params: Params {
                    dim,
                    input: as_cells(input),
                    output: as_cells(output),
                    c1: as_cells(c1),
                    c2: as_cells(c2),
                    weights: as_cells(rel.weights_mut()),
                },
                offsets: &offsets,
                neighbors: &neighbors,
                bucket_of,
                freeze,
                reuse: true,
            };
            run_shard(plan, &kernel, tokens, rng, progress, first_step, observer)
        }
        None => {
            let kernel = SkipKernel {
                dim,
                input: as_cells(input),
                output: as_cells(output),
            };
            run_shard(plan, &kernel, tokens, rng, progress, first_step, observer)
        }
    }
}

/// Lock-free parallel epoch: workers train contiguous shards and update the
/// shared parameters without synchronization.
#[allow(clippy::too_many_arguments)]
fn run_shared(
    plan: &Plan<'_>,
    model: &mut EmbeddingModel,
    relation: Option<&mut RelationMatrix>,
    freeze: Freeze,
    tokens: &[u32],
    progress: &AtomicU64,
    epoch: usize,
    first_step: u64,
) -> Result<(u64, f64)> {
    let threads = plan.config.threads;
    let dim = model.dim();
    let EmbeddingModel {
        input,
        output,
        c1,
        c2,
        bucket_of,
        ..
    } = model;
    let mut no_weights: Vec<f64> = Vec::new();
    let (offsets, neighbors, weights, knet) = match relation {
        Some(rel) => {
            let offsets = rel.offsets().to_vec();
            let neighbors = rel.neighbors().to_vec();
            (offsets, neighbors, rel.weights_mut(), true)
        }
        None => (Vec::new(), Vec::new(), &mut no_weights[..], false),
    };
    let params = Params {
        dim,
        input: as_atomic(input),
        output: as_atomic(output),
        c1: as_atomic(c1),
        c2: as_atomic(c2),
        weights: as_atomic(weights),
    };
    let shard_len = tokens.len().div_ceil(threads);
    let results: Vec<Result<(u64, f64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = tokens
            .chunks(shard_len.max(1))
            .enumerate()
            .map(|(id, shard)| {
                let params = &params;
                let (offsets, neighbors, bucket_of) = (&offsets, &neighbors, &*bucket_of);
                scope.spawn(move || {
                    let seed = plan.config.seed
                        ^ ((epoch as u64) << 32)
                        ^ (id as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let mut none = None;
                    if knet {
                        let kernel = KnetKernel {
                            params: *params,
                            offsets,
                            neighbors,
                            bucket_of,
                            freeze,
                            reuse: false,
                        };
                        run_shard(plan, &kernel, shard, &mut rng, progress, first_step, &mut none)
                    } else {
                        let kernel = SkipKernel {
                            dim,
                            input: params.input,
                            output: params.output,
                        };
                        run_shard(plan, &kernel, shard, &mut rng, progress, first_step, &mut none)
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training worker panicked"))
            .collect()
    });
    let mut total = (0u64, 0.0);
    for r in results {
        let (s, l) = r?;
        total.0 += s;
        total.1 += l;
    }
    Ok(total)
}
