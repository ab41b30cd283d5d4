use super::Tensor;
use crate::{Error, Result};

/// Probabilities are clamped into `[BCE_CLAMP, 1 - BCE_CLAMP]` before logs.
pub const BCE_CLAMP: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    /// Binary cross-entropy averaged over all entries.
    Bce,
    /// Categorical cross-entropy averaged over rows of `[n × classes]`.
    CategoricalXent,
}

/// Returns the scalar loss and its gradient with respect to `pred`.
pub fn loss(kind: LossKind, pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    if pred.shape() != target.shape() {
        return Err(Error::Shape(format!(
            "loss prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("loss over empty tensors".into()));
    }
    let mut grad = Tensor::zeros(pred.shape());
    let value = match kind {
        LossKind::Bce => {
            let n = pred.len() as f64;
            let mut total = 0.0;
            for ((g, &p), &t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
                let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
                total += t * p.ln() + (1.0 - t) * (1.0 - p).ln();
                *g = -(t / p - (1.0 - t) / (1.0 - p)) / n;
            }
            -total / n
        }
        LossKind::CategoricalXent => {
            let rows = pred.rows() as f64;
            let mut total = 0.0;
            for ((g, &p), &t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
                if t != 0.0 {
                    let p = p.clamp(BCE_CLAMP, 1.0);
                    total += t * p.ln();
                    *g = -t / p / rows;
                }
            }
            -total / rows
        }
    };
    Ok((value, grad))
}
