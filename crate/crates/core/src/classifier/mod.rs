//! Intent/snippet match classifier.
//!
//! Each pair becomes `[intent_vec ; code_vec]`: the intent vector averages
//! intent-word skip-gram vectors, the code vector either averages code
//! embeddings of the seq2seq greedy decode or takes `h ⊙ c` of a final LSTM
//! state. A ReLU MLP with dropout and a sigmoid output scores the pair.

mod features;
mod mlp;

pub use features::{
    build_features, code_vec_average, code_vec_hadamard, FeatureInputs, FeatureSet, HiddenSource, PairFeatures,
    Variant,
};
pub use mlp::{predict, stratified_split, train_classifier, ClassifierOutcome, Mlp};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    /// Share of each class held out for validation.
    pub val_fraction: f64,
    pub threshold: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            hidden: vec![100, 50, 25],
            dropout: 0.5,
            epochs: 25,
            batch: 256,
            lr: 0.001,
            val_fraction: 0.1,
            threshold: 0.5,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            errs.push("classifier.hidden needs positive layer sizes".to_string());
        }
        if self.hidden.windows(2).any(|w| w[1] >= w[0]) {
            errs.push(format!("classifier.hidden {:?} must be strictly decreasing", self.hidden));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            errs.push(format!("classifier.dropout {} out of [0,1)", self.dropout));
        }
        if self.batch == 0 {
            errs.push("classifier.batch must be positive".to_string());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            errs.push(format!("classifier.lr {} must be a positive number", self.lr));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            errs.push(format!("classifier.val_fraction {} out of [0,1)", self.val_fraction));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            errs.push(format!("classifier.threshold {} out of [0,1]", self.threshold));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}
