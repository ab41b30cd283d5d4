//! Binary classification metrics and plot/CSV export.
//!
//! A score counts as a positive prediction when `prob >= threshold`.

mod curves;
mod history;
mod plot;

pub use curves::{pr_auc, roc_auc, Curve};
pub use history::{EpochRecord, TrainingHistory};
pub use plot::{bar_chart_svg, line_plot_svg, scatter_svg, Series};

use serde::{Deserialize, Serialize};

use crate::numkit::BCE_CLAMP;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn n(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        let n = self.n();
        if n == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / n as f64
        }
    }

    /// `tp / (tp + fp)`, or 0 when nothing is predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub(crate) fn check_inputs(labels: &[bool], probs: &[f64]) -> Result<()> {
    if labels.len() != probs.len() {
        return Err(Error::Shape(format!("{} labels vs {} scores", labels.len(), probs.len())));
    }
    if labels.is_empty() {
        return Err(Error::InvalidArgument("no predictions to score".into()));
    }
    if let Some(i) = probs.iter().position(|p| !p.is_finite()) {
        return Err(Error::NonFinite(format!("score at index {i}")));
    }
    Ok(())
}

pub fn confusion(labels: &[bool], probs: &[f64], threshold: f64) -> Result<Confusion> {
    check_inputs(labels, probs)?;
    let mut c = Confusion::default();
    for (&y, &p) in labels.iter().zip(probs) {
        match (y, p >= threshold) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    Ok(c)
}

pub fn f1(c: &Confusion) -> f64 {
    c.f1()
}

/// Mean binary cross-entropy with probabilities clamped away from 0 and 1.
pub fn bce(labels: &[bool], probs: &[f64]) -> Result<f64> {
    check_inputs(labels, probs)?;
    let sum: f64 = labels
        .iter()
        .zip(probs)
        .map(|(&y, &p)| {
            let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
            if y {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(sum / labels.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub loss: f64,
    pub accuracy: f64,
    pub f1: f64,
    pub auc_roc: f64,
    pub auc_pr: f64,
    pub confusion: Confusion,
    pub n: u64,
    pub threshold: f64,
}

impl MetricsReport {
    pub fn compute(labels: &[bool], probs: &[f64], threshold: f64) -> Result<Self> {
        let c = confusion(labels, probs, threshold)?;
        Ok(MetricsReport {
            loss: bce(labels, probs)?,
            accuracy: c.accuracy(),
            f1: c.f1(),
            auc_roc: roc_auc(labels, probs)?.auc,
            auc_pr: pr_auc(labels, probs)?.auc,
            confusion: c,
            n: c.n(),
            threshold,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
