//! Skip-gram training over walk corpora with negative sampling.
//!
//! The full softmax decoder is never materialized; each (center, context)
//! pair gets one positive logistic update and `negatives_per_positive`
//! noise updates, with noise drawn from the walk-occurrence unigram
//! distribution raised to 0.75.

use std::cell::UnsafeCell;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::embed::alias::AliasTable;
use crate::embed::{EmbeddingMatrix, WalkConfig};
use crate::error::{Error, Result};
use crate::optim::{make_rowwise_optimizer, OptimizerConfig, OptimizerKind, OptimizerState};
use crate::seed::{derive_seed, rng_for};

/// Skip-gram hyperparameters. `threads = 1` trains sequentially and
/// deterministically; `threads > 1` opts into lock-free shared updates
/// (unsynchronized, non-deterministic by design).
#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramConfig {
    pub negatives_per_positive: usize,
    pub epochs: usize,
    pub optimizer: OptimizerConfig,
    pub threads: usize,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            negatives_per_positive: 5,
            epochs: 1,
            optimizer: OptimizerConfig::new(OptimizerKind::Sgd),
            threads: 1,
        }
    }
}

impl SkipGramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.negatives_per_positive == 0 {
            return Err(Error::Config("embed.negatives must be positive".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be positive".into()));
        }
        self.optimizer.validate()
    }
}

pub struct SkipGramOutput {
    pub embeddings: EmbeddingMatrix,
    /// Mean per-pair loss for each epoch.
    pub loss_trace: Vec<f64>,
}

/// Train embeddings from walks. Returns the center matrix; the context
/// matrix exists only during training.
pub fn train_skipgram(
    walks: &[Vec<u32>],
    node_count: usize,
    cfg: &WalkConfig,
    sg: &SkipGramConfig,
    seed: u64,
) -> Result<SkipGramOutput> {
    cfg.validate()?;
    sg.validate()?;
    if walks.is_empty() {
        return Err(Error::Data("skip-gram needs at least one walk".into()));
    }
    let dim = cfg.dimension;

    // center rows uniform in [-0.5/dim, 0.5/dim], context rows zero
    let mut init_rng = rng_for(seed, "sg-init");
    let half = 0.5 / dim as f64;
    let center_values: Vec<f64> =
        (0..node_count * dim).map(|_| init_rng.gen_range(-half..half)).collect();
    let mut center = EmbeddingMatrix::from_values(node_count, dim, center_values);
    let mut context = EmbeddingMatrix::zeros(node_count, dim);

    if sg.epochs == 0 {
        return Ok(SkipGramOutput { embeddings: center, loss_trace: Vec::new() });
    }

    let noise = noise_table(walks, node_count)?;
    let total_pairs = (count_pairs(walks, cfg.context_size) * sg.epochs as u64).max(1);

    let mut center_opt = make_rowwise_optimizer(sg.optimizer, node_count, dim)?;
    let mut context_opt = make_rowwise_optimizer(sg.optimizer, node_count, dim)?;

    let loss_trace = if sg.threads == 1 {
        train_sequential(
            walks,
            cfg,
            sg,
            seed,
            &noise,
            total_pairs,
            &mut center,
            &mut context,
            &mut center_opt,
            &mut context_opt,
        )?
    } else {
        train_hogwild(
            walks,
            cfg,
            sg,
            seed,
            &noise,
            total_pairs,
            &mut center,
            &mut context,
            &mut center_opt,
            &mut context_opt,
        )?
    };

    if !center.is_finite() {
        return Err(Error::Numerical(
            "skip-gram produced non-finite embeddings (learning rate too high)".into(),
        ));
    }
    Ok(SkipGramOutput { embeddings: center, loss_trace })
}

/// Noise distribution over nodes: walk occurrence counts to the 0.75.
fn noise_table(walks: &[Vec<u32>], node_count: usize) -> Result<AliasTable> {
    let mut counts = vec![0u64; node_count];
    for walk in walks {
        for &node in walk {
            counts[node as usize] += 1;
        }
    }
    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    AliasTable::new(&weights)
}

fn count_pairs(walks: &[Vec<u32>], h: usize) -> u64 {
    let mut total = 0u64;
    for walk in walks {
        let len = walk.len();
        for i in 0..len {
            total += (i.min(h) + (len - 1 - i).min(h)) as u64;
        }
    }
    total
}

/// Loss and gradients of one positive-plus-negatives logistic objective:
/// L = -log sig(c.o) - sum_n log sig(-c.n). Gradients are simultaneous
/// (computed from the pre-update vectors). Returns the loss.
pub(crate) fn pair_gradients(
    center: &[f64],
    pos: &[f64],
    negs: &[&[f64]],
    grad_center: &mut [f64],
    grad_pos: &mut [f64],
    grad_negs: &mut [Vec<f64>],
) -> f64 {
    let dim = center.len();
    grad_center.iter_mut().for_each(|x| *x = 0.0);
    let mut loss = 0.0;

    let s = dot(center, pos);
    let gpos = sigmoid(s) - 1.0;
    loss -= log_sigmoid(s);
    for k in 0..dim {
        grad_center[k] += gpos * pos[k];
        grad_pos[k] = gpos * center[k];
    }

    for (n, neg) in negs.iter().enumerate() {
        let s = dot(center, neg);
        let gneg = sigmoid(s);
        loss -= log_sigmoid(-s);
        let out = &mut grad_negs[n];
        for k in 0..dim {
            grad_center[k] += gneg * neg[k];
            out[k] = gneg * center[k];
        }
    }
    loss
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Draw a negative, rejecting the positive target a few times before
/// giving up (a give-up keeps the draw deterministic and merely skips
/// one noise term).
fn draw_negative<R: Rng>(noise: &AliasTable, rng: &mut R, positive: u32) -> Option<u32> {
    for _ in 0..10 {
        let n = noise.sample(rng) as u32;
        if n != positive {
            return Some(n);
        }
    }
    None
}

struct PairBuffers {
    grad_center: Vec<f64>,
    grad_pos: Vec<f64>,
    grad_negs: Vec<Vec<f64>>,
    negs: Vec<u32>,
}

impl PairBuffers {
    fn new(dim: usize, k: usize) -> Self {
        PairBuffers {
            grad_center: vec![0.0; dim],
            grad_pos: vec![0.0; dim],
            grad_negs: vec![vec![0.0; dim]; k],
            negs: Vec::with_capacity(k),
        }
    }
}

fn decayed_lr(base: &OptimizerConfig, done: u64, total: u64) -> Option<f64> {
    if base.kind == OptimizerKind::Sgd {
        let frac = 1.0 - done as f64 / total as f64;
        Some((base.learning_rate * frac).max(1e-4))
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn train_sequential(
    walks: &[Vec<u32>],
    cfg: &WalkConfig,
    sg: &SkipGramConfig,
    seed: u64,
    noise: &AliasTable,
    total_pairs: u64,
    center: &mut EmbeddingMatrix,
    context: &mut EmbeddingMatrix,
    center_opt: &mut OptimizerState,
    context_opt: &mut OptimizerState,
) -> Result<Vec<f64>> {
    let dim = cfg.dimension;
    let h = cfg.context_size;
    let k = sg.negatives_per_positive;
    let mut rng = rng_for(seed, "sg-train");
    let mut buffers = PairBuffers::new(dim, k);
    let mut order: Vec<usize> = (0..walks.len()).collect();
    let mut done = 0u64;
    let mut trace = Vec::with_capacity(sg.epochs);

    for _epoch in 0..sg.epochs {
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut epoch_pairs = 0u64;
        for &wi in &order {
            let walk = &walks[wi];
            for i in 0..walk.len() {
                let c = walk[i];
                let lo = i.saturating_sub(h);
                let hi = (i + h).min(walk.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let o = walk[j];
                    if let Some(lr) = decayed_lr(&sg.optimizer, done, total_pairs) {
                        center_opt.set_learning_rate(lr);
                        context_opt.set_learning_rate(lr);
                    }
                    buffers.negs.clear();
                    for _ in 0..k {
                        if let Some(n) = draw_negative(noise, &mut rng, o) {
                            buffers.negs.push(n);
                        }
                    }
                    let loss = {
                        let neg_rows: Vec<&[f64]> =
                            buffers.negs.iter().map(|&n| context.row(n)).collect();
                        pair_gradients(
                            center.row(c),
                            context.row(o),
                            &neg_rows,
                            &mut buffers.grad_center,
                            &mut buffers.grad_pos,
                            &mut buffers.grad_negs,
                        )
                    };
                    if !loss.is_finite() {
                        return Err(Error::Numerical(format!(
                            "non-finite skip-gram loss at pair {done} (learning rate too high)"
                        )));
                    }
                    context_opt.step_row(o as usize, context.row_mut(o), &buffers.grad_pos)?;
                    for (slot, &n) in buffers.negs.iter().enumerate() {
                        context_opt.step_row(
                            n as usize,
                            context.row_mut(n),
                            &buffers.grad_negs[slot],
                        )?;
                    }
                    center_opt.step_row(c as usize, center.row_mut(c), &buffers.grad_center)?;
                    epoch_loss += loss;
                    epoch_pairs += 1;
                    done += 1;
                }
            }
        }
        trace.push(if epoch_pairs == 0 { 0.0 } else { epoch_loss / epoch_pairs as f64 });
    }
    Ok(trace)
}

/// Shared embedding storage for the lock-free mode. Rows are updated
/// without synchronization; colliding writes are an accepted race, the
/// trade the caller opts into with `threads > 1`.
struct SharedRows {
    cell: UnsafeCell<Vec<f64>>,
    dim: usize,
}

unsafe impl Sync for SharedRows {}

impl SharedRows {
    fn new(values: Vec<f64>, dim: usize) -> Self {
        SharedRows { cell: UnsafeCell::new(values), dim }
    }

    /// # Safety
    /// Concurrent calls may alias; callers accept torn reads/writes.
    #[allow(clippy::mut_from_ref)]
    unsafe fn row_mut(&self, node: u32) -> &mut [f64] {
        let vec = &mut *self.cell.get();
        let start = node as usize * self.dim;
        std::slice::from_raw_parts_mut(vec.as_mut_ptr().add(start), self.dim)
    }

    fn into_inner(self) -> Vec<f64> {
        self.cell.into_inner()
    }
}

#[allow(clippy::too_many_arguments)]
fn train_hogwild(
    walks: &[Vec<u32>],
    cfg: &WalkConfig,
    sg: &SkipGramConfig,
    seed: u64,
    noise: &AliasTable,
    total_pairs: u64,
    center: &mut EmbeddingMatrix,
    context: &mut EmbeddingMatrix,
    center_opt: &mut OptimizerState,
    context_opt: &mut OptimizerState,
) -> Result<Vec<f64>> {
    use std::sync::atomic::{AtomicU64, Ordering};

    let dim = cfg.dimension;
    let h = cfg.context_size;
    let k = sg.negatives_per_positive;
    let node_count = center.node_count();
    let threads = sg.threads.min(walks.len()).max(1);

    let center_shared = SharedRows::new(std::mem::take(center).into_values(), dim);
    let context_shared = SharedRows::new(std::mem::take(context).into_values(), dim);
    let center_raw = center_opt.raw_row_state();
    let context_raw = context_opt.raw_row_state();

    let done = AtomicU64::new(0);
    let chunk = walks.len().div_ceil(threads);
    let mut trace = Vec::with_capacity(sg.epochs);

    for epoch in 0..sg.epochs {
        let epoch_totals: Vec<(f64, u64)> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for (tid, walk_chunk) in walks.chunks(chunk).enumerate() {
                let center_shared = &center_shared;
                let context_shared = &context_shared;
                let done = &done;
                let mut center_raw = center_raw;
                let mut context_raw = context_raw;
                handles.push(scope.spawn(move || {
                    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(
                        seed,
                        &format!("sg-hogwild-{epoch}-{tid}"),
                    ));
                    let mut buffers = PairBuffers::new(dim, k);
                    let mut loss_sum = 0.0;
                    let mut pairs = 0u64;
                    for walk in walk_chunk {
                        for i in 0..walk.len() {
                            let c = walk[i];
                            let lo = i.saturating_sub(h);
                            let hi = (i + h).min(walk.len() - 1);
                            for j in lo..=hi {
                                if j == i {
                                    continue;
                                }
                                let o = walk[j];
                                let at = done.fetch_add(1, Ordering::Relaxed);
                                if let Some(lr) = decayed_lr(&sg.optimizer, at, total_pairs) {
                                    center_raw.cfg.learning_rate = lr;
                                    context_raw.cfg.learning_rate = lr;
                                }
                                buffers.negs.clear();
                                for _ in 0..k {
                                    if let Some(n) = draw_negative(noise, &mut rng, o) {
                                        buffers.negs.push(n);
                                    }
                                }
                                // Accepted race: rows may be read and written
                                // concurrently by other threads.
                                let loss = unsafe {
                                    let neg_rows: Vec<&[f64]> = buffers
                                        .negs
                                        .iter()
                                        .map(|&n| &*(context_shared.row_mut(n) as &[f64] as *const [f64]))
                                        .collect();
                                    pair_gradients(
                                        center_shared.row_mut(c),
                                        context_shared.row_mut(o),
                                        &neg_rows,
                                        &mut buffers.grad_center,
                                        &mut buffers.grad_pos,
                                        &mut buffers.grad_negs,
                                    )
                                };
                                if loss.is_finite() {
                                    loss_sum += loss;
                                }
                                unsafe {
                                    context_raw.update_row(
                                        o as usize,
                                        context_shared.row_mut(o),
                                        &buffers.grad_pos,
                                    );
                                    for (slot, &n) in buffers.negs.iter().enumerate() {
                                        context_raw.update_row(
                                            n as usize,
                                            context_shared.row_mut(n),
                                            &buffers.grad_negs[slot],
                                        );
                                    }
                                    center_raw.update_row(
                                        c as usize,
                                        center_shared.row_mut(c),
                                        &buffers.grad_center,
                                    );
                                }
                                pairs += 1;
                            }
                        }
                    }
                    (loss_sum, pairs)
                }));
            }
            handles.into_iter().map(|worker| worker.join().expect("training thread panicked")).collect()
        });
        let (loss_sum, pairs): (f64, u64) =
            epoch_totals.iter().fold((0.0, 0), |(l, p), &(dl, dp)| (l + dl, p + dp));
        trace.push(if pairs == 0 { 0.0 } else { loss_sum / pairs as f64 });
    }

    let total_done = done.load(std::sync::atomic::Ordering::Relaxed);
    center_opt.add_steps(total_done);
    context_opt.add_steps(total_done * (1 + k as u64));
    *center = EmbeddingMatrix::from_values(node_count, dim, center_shared.into_inner());
    *context = EmbeddingMatrix::from_values(node_count, dim, context_shared.into_inner());
    Ok(trace)
}
