use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::table::{Algorithm, EmbeddingMeta, EmbeddingTable};
use super::vocab::{Vocabulary, NUM_SPECIALS};
use crate::numkit::vecops::{dot, sigmoid};
use crate::numkit::{uniform, Tensor};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkipgramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Starting learning rate; decays linearly to a tenth of it by the last
    /// epoch.
    pub lr: f64,
    pub seed: u64,
    /// Shard count for the opt-in parallel mode. `0` or `1` trains
    /// sequentially.
    pub shards: usize,
}

impl Default for SkipgramConfig {
    fn default() -> Self {
        SkipgramConfig {
            dim: 100,
            window: 4,
            negatives: 5,
            epochs: 10,
            lr: 0.025,
            seed: 0,
            shards: 0,
        }
    }
}

impl SkipgramConfig {
    /// Learning rate used during epoch `e` (0-based).
    pub fn lr_at(&self, e: usize) -> f64 {
        if self.epochs <= 1 {
            return self.lr;
        }
        let t = e as f64 / (self.epochs - 1) as f64;
        self.lr * (1.0 - 0.9 * t)
    }
}

/// Trained input vectors (the table) and the output/context vectors.
#[derive(Clone, Debug)]
pub struct SkipgramOutput {
    pub table: EmbeddingTable,
    pub context: Tensor,
    /// Mean negative-sampling loss per epoch.
    pub epoch_loss: Vec<f64>,
}

struct Weights {
    input: Vec<f64>,
    output: Vec<f64>,
    dim: usize,
}

/// Skip-gram with negative sampling. Out-of-vocabulary tokens are dropped
/// before windowing. Negatives are drawn from unigram counts raised to 0.75
/// over the non-special tokens; a draw equal to the true context is skipped.
///
/// With `shards <= 1` the run is a single sequential SGD pass per epoch and
/// is bitwise reproducible for a seed. With more shards each epoch trains
/// shard copies independently and averages them; this is reproducible too,
/// but gives different numbers than the sequential path.
pub fn train_skipgram<S: AsRef<str> + Sync>(
    corpus: &[Vec<S>],
    vocab: &Vocabulary,
    cfg: &SkipgramConfig,
    corpus_tag: &str,
    min_count: u64,
) -> Result<SkipgramOutput> {
    if cfg.dim == 0 || cfg.window == 0 {
        return Err(Error::InvalidArgument("skip-gram dim and window must be positive".into()));
    }
    let sentences: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| s.iter().filter_map(|t| vocab.index_of(t.as_ref())).filter(|&i| i >= NUM_SPECIALS).collect())
        .filter(|s: &Vec<usize>| s.len() >= 2)
        .collect();
    let weights: Vec<f64> = vocab
        .counts()
        .iter()
        .enumerate()
        .map(|(i, &c)| if i < NUM_SPECIALS { 0.0 } else { (c as f64).powf(0.75) })
        .collect();
    if sentences.is_empty() || !weights.iter().any(|&w| w > 0.0) {
        return Err(Error::InvalidArgument("skip-gram corpus has no trainable pairs".into()));
    }
    let noise = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let v = vocab.len();
    let d = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let half = 0.5 / d as f64;
    let input = uniform(&mut rng, &[v, d], -half, half).into_data();
    let mut w = Weights {
        input,
        output: vec![0.0; v * d],
        dim: d,
    };

    let mut order: Vec<usize> = (0..sentences.len()).collect();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    for e in 0..cfg.epochs {
        let lr = cfg.lr_at(e);
        order.shuffle(&mut rng);
        let (loss, pairs) = if cfg.shards <= 1 {
            run_shard(&mut w, &sentences, &order, cfg, lr, &noise, &mut rng)
        } else {
            let seeds: Vec<u64> = (0..cfg.shards).map(|_| rng.gen()).collect();
            let chunk = order.len().div_ceil(cfg.shards);
            let parts: Vec<&[usize]> = order.chunks(chunk).collect();
            let results = crate::par::map_range(parts.len(), |k| {
                let mut local = Weights {
                    input: w.input.clone(),
                    output: w.output.clone(),
                    dim: d,
                };
                let mut r = ChaCha8Rng::seed_from_u64(seeds[k]);
                let stats = run_shard(&mut local, &sentences, parts[k], cfg, lr, &noise, &mut r);
                (local, stats)
            });
            let n = results.len() as f64;
            w.input.iter_mut().for_each(|x| *x = 0.0);
            w.output.iter_mut().for_each(|x| *x = 0.0);
            let mut tot = (0.0, 0usize);
            for (local, (l, p)) in results {
                for (a, b) in w.input.iter_mut().zip(&local.input) {
                    *a += b / n;
                }
                for (a, b) in w.output.iter_mut().zip(&local.output) {
                    *a += b / n;
                }
                tot.0 += l;
                tot.1 += p;
            }
            tot
        };
        epoch_loss.push(if pairs > 0 { loss / pairs as f64 } else { 0.0 });
        log::debug!("skip-gram epoch {} lr {:.5} loss {:.5}", e + 1, lr, epoch_loss[e]);
    }

    let matrix = Tensor::new(vec![v, d], w.input)?;
    matrix.check_finite("skip-gram table")?;
    let meta = EmbeddingMeta {
        algorithm: Algorithm::W2v,
        corpus: corpus_tag.to_string(),
        window: cfg.window,
        min_count,
        epochs: cfg.epochs,
        dim: d,
        seed: Some(cfg.seed),
    };
    Ok(SkipgramOutput {
        table: EmbeddingTable::new(vocab.clone(), matrix, meta)?,
        context: Tensor::new(vec![v, d], w.output)?,
        epoch_loss,
    })
}

fn run_shard<R: Rng>(
    w: &mut Weights,
    sentences: &[Vec<usize>],
    order: &[usize],
    cfg: &SkipgramConfig,
    lr: f64,
    noise: &WeightedIndex<f64>,
    rng: &mut R,
) -> (f64, usize) {
    let d = w.dim;
    let mut grad = vec![0.0; d];
    let mut loss = 0.0;
    let mut pairs = 0;
    for &s in order {
        let sent = &sentences[s];
        for (pos, &center) in sent.iter().enumerate() {
            let lo = pos.saturating_sub(cfg.window);
            let hi = (pos + cfg.window).min(sent.len() - 1);
            for (cpos, &ctx) in sent.iter().enumerate().take(hi + 1).skip(lo) {
                if cpos == pos {
                    continue;
                }
                grad.iter_mut().for_each(|g| *g = 0.0);
                loss += update(w, center, ctx, 1.0, lr, &mut grad);
                for _ in 0..cfg.negatives {
                    let neg = noise.sample(rng);
                    if neg == ctx {
                        continue;
                    }
                    loss += update(w, center, neg, 0.0, lr, &mut grad);
                }
                let row = &mut w.input[center * d..(center + 1) * d];
                crate::numkit::vecops::add_assign(row, &grad);
                pairs += 1;
            }
        }
    }
    (loss, pairs)
}

/// One logistic step on (center, target); accumulates the center gradient
/// and updates the target's output row in place. Returns the loss term.
fn update(w: &mut Weights, center: usize, target: usize, label: f64, lr: f64, grad: &mut [f64]) -> f64 {
    let d = w.dim;
    let vin = &w.input[center * d..(center + 1) * d];
    let vout = &mut w.output[target * d..(target + 1) * d];
    let p = sigmoid(dot(vin, vout));
    let g = lr * (label - p);
    for k in 0..d {
        grad[k] += g * vout[k];
        vout[k] += g * vin[k];
    }
    let q = if label > 0.5 { p } else { 1.0 - p };
    -q.max(1e-12).ln()
}
