use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{Seq2SeqGrads, Seq2SeqModel, StepStats};
use super::vectorize::Example;
use super::Seq2SeqConfig;
use crate::embed::{END_ID, PAD_ID};
use crate::evalkit::{EpochRecord, TrainingHistory};
use crate::numkit::{adam_step, AdamState, Tensor};
use crate::{Error, Result};

/// Examples per gradient shard; fixed so sums do not depend on threads.
const GRAD_CHUNK: usize = 4;

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: Seq2SeqModel,
    pub history: TrainingHistory,
    /// Epochs actually run (early stop may end sooner).
    pub epochs_run: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seq2SeqEval {
    pub loss: f64,
    pub token_accuracy: f64,
    /// Share of examples whose greedy decode equals the reference code.
    pub exact_match: f64,
    pub n: usize,
}

fn counted_positions(batch: &[&Example], mask_pad: bool) -> usize {
    batch
        .iter()
        .map(|e| {
            if mask_pad {
                e.target.iter().filter(|&&t| t != PAD_ID).count()
            } else {
                e.target.len()
            }
        })
        .sum()
}

/// Batch loss tallies and the gradient of the batch-mean loss.
pub fn batch_gradient(model: &Seq2SeqModel, batch: &[&Example], mask_pad: bool, train_emb: bool) -> (Seq2SeqGrads, StepStats) {
    let n = counted_positions(batch, mask_pad).max(1);
    let scale = 1.0 / n as f64;
    crate::par::map_reduce_chunks(
        batch,
        GRAD_CHUNK,
        || (model.zero_grads(train_emb), StepStats::default()),
        |acc, ex| {
            let s = model.forward_backward(ex, mask_pad, scale, Some(&mut acc.0));
            acc.1.add(s);
        },
        |acc, part| {
            acc.0.add_assign(&part.0);
            acc.1.add(part.1);
        },
    )
    .unwrap_or_else(|| (model.zero_grads(train_emb), StepStats::default()))
}

struct Optimizer {
    states: Vec<AdamState>,
    train_emb: bool,
}

impl Optimizer {
    fn new(model: &Seq2SeqModel, lr: f64, train_emb: bool) -> Self {
        let states = model
            .tensors()
            .iter()
            .map(|(_, t)| AdamState::new(t.shape(), lr))
            .collect();
        Optimizer { states, train_emb }
    }

    fn step(&mut self, model: &mut Seq2SeqModel, g: Seq2SeqGrads) -> Result<()> {
        let grads: [Vec<f64>; 10] = [
            g.enc.w.into_data(),
            g.enc.u.into_data(),
            g.enc.b.into_data(),
            g.dec.w.into_data(),
            g.dec.u.into_data(),
            g.dec.b.into_data(),
            g.out_w,
            g.out_b,
            g.emb_intent,
            g.emb_code,
        ];
        let train_emb = self.train_emb;
        for (k, (param, grad)) in model.tensors_mut().into_iter().zip(grads).enumerate() {
            if k >= 8 && !train_emb {
                continue;
            }
            let grad = Tensor::new(param.shape().to_vec(), grad)?;
            adam_step(param, &grad, &mut self.states[k])?;
        }
        Ok(())
    }
}

/// Teacher-forced training with Adam over shuffled mini-batches. Epoch loss
/// and token accuracy are accumulated during the epoch, as the weights
/// change. Validation, when given, is scored after each epoch.
pub fn train(
    mut model: Seq2SeqModel,
    examples: &[Example],
    validation: Option<&[Example]>,
    cfg: &Seq2SeqConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::InvalidArgument("seq2seq training needs at least one pair".into()));
    }
    let train_emb = !cfg.freeze_embeddings;
    let mut opt = Optimizer::new(&model, cfg.lr, train_emb);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut history = TrainingHistory::default();
    let mut epochs_run = 0;
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut stats = StepStats::default();
        for chunk in order.chunks(cfg.batch) {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &examples[i]).collect();
            let (g, s) = batch_gradient(&model, &batch, cfg.mask_pad, train_emb);
            if !s.loss.is_finite() {
                return Err(Error::NonFinite(format!("seq2seq loss at epoch {epoch}")));
            }
            opt.step(&mut model, g)?;
            stats.add(s);
        }
        let (val_loss, val_accuracy) = match validation {
            Some(v) if !v.is_empty() => {
                let s = score(&model, v, cfg.mask_pad);
                (Some(s.mean_loss()), Some(s.accuracy()))
            }
            _ => (None, None),
        };
        let rec = EpochRecord {
            epoch,
            loss: stats.mean_loss(),
            accuracy: stats.accuracy(),
            val_loss,
            val_accuracy,
        };
        log::info!(
            "seq2seq epoch {epoch}/{} loss {:.4} token_accuracy {:.4}",
            cfg.epochs,
            rec.loss,
            rec.accuracy
        );
        let acc = rec.accuracy;
        history.push(rec);
        epochs_run = epoch;
        if cfg.early_stop_accuracy.is_some_and(|t| acc >= t) {
            break;
        }
    }
    Ok(TrainOutcome {
        model,
        history,
        epochs_run,
    })
}

/// Summed teacher-forced tallies without gradients.
pub fn score(model: &Seq2SeqModel, examples: &[Example], mask_pad: bool) -> StepStats {
    crate::par::map_reduce_chunks(
        examples,
        GRAD_CHUNK,
        StepStats::default,
        |acc, ex| acc.add(model.forward_backward(ex, mask_pad, 1.0, None)),
        |acc, part| acc.add(part),
    )
    .unwrap_or_default()
}

/// Reference code indices of an example (target up to `<END>`).
pub fn reference_code(ex: &Example) -> &[usize] {
    let end = ex.target.iter().position(|&t| t == END_ID).unwrap_or(ex.target.len());
    &ex.target[..end]
}

pub fn evaluate(model: &Seq2SeqModel, examples: &[Example], mask_pad: bool) -> Result<Seq2SeqEval> {
    let s = score(model, examples, mask_pad);
    let hits = crate::par::map(examples, |ex| {
        model
            .infer_greedy(&ex.intent, model.code_len)
            .map(|(toks, _)| toks == reference_code(ex))
    });
    let mut exact = 0usize;
    for h in hits {
        if h? {
            exact += 1;
        }
    }
    let n = examples.len();
    Ok(Seq2SeqEval {
        loss: s.mean_loss(),
        token_accuracy: s.accuracy(),
        exact_match: if n == 0 { 0.0 } else { exact as f64 / n as f64 },
        n,
    })
}
