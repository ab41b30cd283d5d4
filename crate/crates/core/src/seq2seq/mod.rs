//! Encoder-decoder LSTM from intent words to code tokens.
//!
//! The encoder reads the padded intent; its final `(h, c)` seeds the
//! decoder, which is teacher-forced on `<START> + code` and predicts
//! `code + <END>` through a softmax layer. By default loss and token
//! accuracy include PAD positions, which inflates accuracy on short code;
//! `mask_pad` restricts both to non-PAD targets.

mod model;
mod train;
mod vectorize;

pub use model::{EncodedState, Seq2SeqGrads, Seq2SeqModel, StepStats};
pub use train::{batch_gradient, evaluate, reference_code, score, train, Seq2SeqEval, TrainOutcome};
pub use vectorize::{intent_indices, pair_tokens, vectorize, Example, PairTokens, Seq2SeqVocabs};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seq2SeqConfig {
    pub intent_len: usize,
    /// Code tokens kept; decoder sequences are one longer.
    pub code_len: usize,
    pub hidden: usize,
    pub intent_vocab_cap: usize,
    pub code_vocab_cap: usize,
    /// Embedding width when no pre-trained table is supplied.
    pub embed_dim: usize,
    pub freeze_embeddings: bool,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub mask_pad: bool,
    /// Stop once an epoch's token accuracy reaches this value.
    pub early_stop_accuracy: Option<f64>,
}

impl Default for Seq2SeqConfig {
    fn default() -> Self {
        Seq2SeqConfig {
            intent_len: 35,
            code_len: 50,
            hidden: 100,
            intent_vocab_cap: 5000,
            code_vocab_cap: 5000,
            embed_dim: 100,
            freeze_embeddings: true,
            epochs: 25,
            batch: 256,
            lr: 0.001,
            mask_pad: false,
            early_stop_accuracy: None,
        }
    }
}

impl Seq2SeqConfig {
    pub fn decoder_len(&self) -> usize {
        self.code_len + 1
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for (name, v) in [
            ("intent_len", self.intent_len),
            ("code_len", self.code_len),
            ("hidden", self.hidden),
            ("embed_dim", self.embed_dim),
            ("batch", self.batch),
        ] {
            if v == 0 {
                errs.push(format!("seq2seq.{name} must be positive"));
            }
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            errs.push(format!("seq2seq.lr {} must be a positive number", self.lr));
        }
        if let Some(a) = self.early_stop_accuracy {
            if !(0.0..=1.0).contains(&a) {
                errs.push(format!("seq2seq.early_stop_accuracy {a} out of [0,1]"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}
