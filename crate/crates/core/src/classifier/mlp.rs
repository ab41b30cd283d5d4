use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::ClassifierConfig;
use crate::evalkit::{EpochRecord, TrainingHistory};
use crate::numkit::{
    adam_step, dense_backward, dense_forward, dropout, glorot_uniform, loss, Activation, AdamState, Checkpoint,
    DropoutMask, LossKind, Tensor, BCE_CLAMP,
};
use crate::{Error, Result};

/// ReLU layers with dropout after each, then one sigmoid unit.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    /// `(W [d_in × d_out], b [d_out])` per layer; the last is the output.
    pub layers: Vec<(Tensor, Tensor)>,
    pub dropout: f64,
}

struct Trace {
    /// Input of each layer (after dropout for hidden inputs).
    inputs: Vec<Tensor>,
    /// Activated output of each layer, before dropout.
    outputs: Vec<Tensor>,
    masks: Vec<DropoutMask>,
}

fn layer_name(k: usize, n: usize) -> String {
    if k + 1 == n {
        "out".to_string()
    } else {
        format!("fc{}", k + 1)
    }
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(input: usize, cfg: &ClassifierConfig, rng: &mut R) -> Self {
        let mut sizes = vec![input];
        sizes.extend_from_slice(&cfg.hidden);
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|w| (glorot_uniform(rng, &[w[0], w[1]], w[0], w[1]), Tensor::zeros(&[w[1]])))
            .collect();
        Mlp {
            layers,
            dropout: cfg.dropout,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].0.rows()
    }

    fn activation(&self, k: usize) -> Activation {
        if k + 1 == self.layers.len() {
            Activation::Sigmoid
        } else {
            Activation::Relu
        }
    }

    fn forward<R: Rng + ?Sized>(&self, x: &Tensor, training: bool, rng: &mut R) -> Result<Trace> {
        let n = self.layers.len();
        let mut t = Trace {
            inputs: Vec::with_capacity(n),
            outputs: Vec::with_capacity(n),
            masks: Vec::with_capacity(n),
        };
        let mut cur = x.clone();
        for (k, (w, b)) in self.layers.iter().enumerate() {
            let y = dense_forward(&cur, w, b, self.activation(k))?;
            t.inputs.push(cur);
            if k + 1 < n {
                let (dropped, mask) = dropout(&y, self.dropout, training, rng)?;
                t.masks.push(mask);
                cur = dropped;
            } else {
                cur = y.clone();
            }
            t.outputs.push(y);
        }
        Ok(t)
    }

    /// Probabilities with dropout off, clamped into `(0, 1)`.
    pub fn predict(&self, x: &Tensor) -> Result<Vec<f64>> {
        if x.shape().len() != 2 || x.cols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "features {:?} for a classifier expecting {} inputs",
                x.shape(),
                self.input_dim()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = self.forward(x, false, &mut rng)?;
        let out = t.outputs.last().expect("output layer");
        Ok(out.data().iter().map(|p| p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP)).collect())
    }

    /// Mean BCE on a batch and per-layer `(dW, db)`.
    pub fn loss_and_grads<R: Rng + ?Sized>(
        &self,
        x: &Tensor,
        y: &[bool],
        training: bool,
        rng: &mut R,
    ) -> Result<(f64, Vec<(Tensor, Tensor)>, Vec<f64>)> {
        let t = self.forward(x, training, rng)?;
        let pred = t.outputs.last().expect("output layer");
        let target = Tensor::new(vec![y.len(), 1], y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())?;
        let (value, mut dy) = loss(LossKind::Bce, pred, &target)?;
        let mut grads = Vec::with_capacity(self.layers.len());
        for k in (0..self.layers.len()).rev() {
            let (w, _) = &self.layers[k];
            let g = dense_backward(&t.inputs[k], w, &t.outputs[k], &dy, self.activation(k))?;
            grads.push((g.dw, g.db));
            if k > 0 {
                dy = t.masks[k - 1].backward(&g.dx);
            }
        }
        grads.reverse();
        Ok((value, grads, pred.data().to_vec()))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::new();
        let n = self.layers.len();
        ck.meta.insert("model".into(), json!("classifier"));
        ck.meta.insert("dropout".into(), json!(self.dropout));
        let sizes: Vec<usize> = self.layers.iter().map(|(w, _)| w.cols()).collect();
        ck.meta.insert("input".into(), json!(self.input_dim()));
        ck.meta.insert("sizes".into(), json!(sizes));
        for (k, (w, b)) in self.layers.iter().enumerate() {
            let name = layer_name(k, n);
            ck.push(format!("{name}.W"), w.clone());
            ck.push(format!("{name}.b"), b.clone());
        }
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let bad = |m: &str| Error::Format(format!("classifier checkpoint: {m}"));
        let input = ck.meta.get("input").and_then(|v| v.as_u64()).ok_or_else(|| bad("missing input"))? as usize;
        let sizes: Vec<usize> = ck
            .meta
            .get("sizes")
            .and_then(|v| serde_json::from_value(v.clone()).ok())
            .ok_or_else(|| bad("missing sizes"))?;
        let dropout = ck.meta.get("dropout").and_then(|v| v.as_f64()).unwrap_or(0.0);
        if sizes.last() != Some(&1) {
            return Err(bad("last layer must have one unit"));
        }
        let mut layers = Vec::new();
        let mut d = input;
        for (k, &m) in sizes.iter().enumerate() {
            let name = layer_name(k, sizes.len());
            let w = ck.expect(&format!("{name}.W"), &[d, m])?.clone();
            let b = ck.expect(&format!("{name}.b"), &[m])?.clone();
            layers.push((w, b));
            d = m;
        }
        Ok(Mlp { layers, dropout })
    }
}

/// Probabilities from a checkpoint.
pub fn predict(x: &Tensor, ck: &Checkpoint) -> Result<Vec<f64>> {
    Mlp::from_checkpoint(ck)?.predict(x)
}

/// Per-class shuffle, then the first `round(fraction · class size)` of
/// each class go to validation. Returns (train, validation) row indices in
/// ascending order.
pub fn stratified_split(labels: &[bool], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let k = (fraction * idx.len() as f64).round() as usize;
        val.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

#[derive(Clone, Debug)]
pub struct ClassifierOutcome {
    pub model: Mlp,
    pub history: TrainingHistory,
    pub train_rows: Vec<usize>,
    pub val_rows: Vec<usize>,
}

fn rows(x: &Tensor, idx: &[usize]) -> Result<Tensor> {
    let d = x.cols();
    let mut data = Vec::with_capacity(idx.len() * d);
    for &i in idx {
        data.extend_from_slice(x.row(i));
    }
    Tensor::new(vec![idx.len(), d], data)
}

fn accuracy(probs: &[f64], y: &[bool], threshold: f64) -> f64 {
    let hits = probs.iter().zip(y).filter(|(&p, &t)| (p >= threshold) == t).count();
    hits as f64 / y.len().max(1) as f64
}

/// Adam on mini-batches of the stratified training split. Epoch train
/// metrics are batch-size-weighted means with dropout active; validation is
/// scored with dropout off after each epoch.
pub fn train_classifier(x: &Tensor, y: &[bool], cfg: &ClassifierConfig, seed: u64) -> Result<ClassifierOutcome> {
    cfg.validate()?;
    if x.rows() != y.len() {
        return Err(Error::Shape(format!("{} feature rows vs {} labels", x.rows(), y.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train_rows, val_rows) = stratified_split(y, cfg.val_fraction, rng.gen());
    let ty: Vec<bool> = train_rows.iter().map(|&i| y[i]).collect();
    if !(ty.contains(&true) && ty.contains(&false)) {
        return Err(Error::InvalidArgument("classifier training split has a single class".into()));
    }
    let mut model = Mlp::new(x.cols(), cfg, &mut rng);
    let mut states: Vec<(AdamState, AdamState)> = model
        .layers
        .iter()
        .map(|(w, b)| (AdamState::new(w.shape(), cfg.lr), AdamState::new(b.shape(), cfg.lr)))
        .collect();
    let vx = rows(x, &val_rows)?;
    let vy: Vec<bool> = val_rows.iter().map(|&i| y[i]).collect();

    let mut order = train_rows.clone();
    let mut history = TrainingHistory::default();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut hit_sum) = (0.0, 0.0);
        for chunk in order.chunks(cfg.batch) {
            let bx = rows(x, chunk)?;
            let by: Vec<bool> = chunk.iter().map(|&i| y[i]).collect();
            let (l, grads, probs) = model.loss_and_grads(&bx, &by, true, &mut rng)?;
            if !l.is_finite() {
                return Err(Error::NonFinite(format!("classifier loss at epoch {epoch}")));
            }
            for ((layer, g), st) in model.layers.iter_mut().zip(&grads).zip(&mut states) {
                adam_step(&mut layer.0, &g.0, &mut st.0)?;
                adam_step(&mut layer.1, &g.1, &mut st.1)?;
            }
            loss_sum += l * chunk.len() as f64;
            hit_sum += accuracy(&probs, &by, cfg.threshold) * chunk.len() as f64;
        }
        let n = order.len() as f64;
        let (val_loss, val_accuracy) = if vy.is_empty() {
            (None, None)
        } else {
            let p = model.predict(&vx)?;
            (Some(crate::evalkit::bce(&vy, &p)?), Some(accuracy(&p, &vy, cfg.threshold)))
        };
        let rec = EpochRecord {
            epoch,
            loss: loss_sum / n,
            accuracy: hit_sum / n,
            val_loss,
            val_accuracy,
        };
        log::info!("classifier epoch {epoch}/{} loss {:.4} accuracy {:.4}", cfg.epochs, rec.loss, rec.accuracy);
        history.push(rec);
    }
    Ok(ClassifierOutcome {
        model,
        history,
        train_rows,
        val_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::grad_check;

    fn small_cfg() -> ClassifierConfig {
        ClassifierConfig {
            hidden: vec![5, 4, 3],
            ..ClassifierConfig::default()
        }
    }

    #[test]
    fn gradient_check_with_fixed_dropout() {
        let cfg = small_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut model = Mlp::new(4, &cfg, &mut rng);
        // Non-zero biases keep every pre-activation off the ReLU kink, even
        // when dropout empties a whole row.
        for (_, b) in &mut model.layers {
            *b = crate::numkit::uniform(&mut rng, b.shape(), 0.1, 0.3);
        }
        let x = crate::numkit::uniform(&mut rng, &[6, 4], -1.0, 1.0);
        let y = [true, false, true, true, false, false];
        let flat: Vec<f64> = model
            .layers
            .iter()
            .flat_map(|(w, b)| w.data().iter().chain(b.data()).copied().collect::<Vec<_>>())
            .collect();
        let err = grad_check(
            |p| {
                let mut m = model.clone();
                let mut off = 0;
                for (w, b) in &mut m.layers {
                    for t in [w, b] {
                        let n = t.len();
                        t.data_mut().copy_from_slice(&p[off..off + n]);
                        off += n;
                    }
                }
                // Same mask every call.
                let mut r = ChaCha8Rng::seed_from_u64(4);
                let (l, g, _) = m.loss_and_grads(&x, &y, true, &mut r).unwrap();
                let flat: Vec<f64> = g
                    .iter()
                    .flat_map(|(w, b)| w.data().iter().chain(b.data()).copied().collect::<Vec<_>>())
                    .collect();
                (l, flat)
            },
            &flat,
            1e-6,
        )
        .unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn zero_weights_give_half() {
        let cfg = small_cfg();
        let mut m = Mlp::new(3, &cfg, &mut ChaCha8Rng::seed_from_u64(1));
        for (w, b) in &mut m.layers {
            w.fill(0.0);
            b.fill(0.0);
        }
        let x = Tensor::from_rows(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(m.predict(&x).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn hand_set_weights() {
        let m = Mlp {
            layers: vec![
                (Tensor::from_rows(&[vec![1.0, -1.0], vec![0.5, 2.0]]).unwrap(), Tensor::vector(vec![0.1, -0.2])),
                (Tensor::from_rows(&[vec![0.3], vec![-0.7]]).unwrap(), Tensor::vector(vec![0.05])),
            ],
            dropout: 0.5,
        };
        let (a, b) = (0.4, -1.2);
        let h1 = (a * 1.0 + b * 0.5 + 0.1f64).max(0.0);
        let h2 = (a * -1.0 + b * 2.0 - 0.2f64).max(0.0);
        let z = h1 * 0.3 + h2 * -0.7 + 0.05;
        let want = 1.0 / (1.0 + (-z).exp());
        let got = m.predict(&Tensor::from_rows(&[vec![a, b]]).unwrap()).unwrap()[0];
        assert!((got - want).abs() < 1e-12);
        assert!(m.predict(&Tensor::from_rows(&[vec![a]]).unwrap()).is_err());
    }

    #[test]
    fn split_is_stratified() {
        let y: Vec<bool> = (0..100).map(|i| i % 4 == 0).collect();
        let (tr, va) = stratified_split(&y, 0.1, 3);
        assert_eq!(tr.len() + va.len(), 100);
        assert_eq!(va.iter().filter(|&&i| y[i]).count(), 3);
        assert_eq!(va.len(), 3 + 8);
    }

    #[test]
    fn training_is_deterministic_and_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = crate::numkit::uniform(&mut rng, &[60, 4], -1.0, 1.0);
        let y: Vec<bool> = (0..60).map(|i| x.row(i)[0] > 0.0).collect();
        let cfg = ClassifierConfig { epochs: 3, batch: 16, ..small_cfg() };
        let a = train_classifier(&x, &y, &cfg, 5).unwrap();
        let b = train_classifier(&x, &y, &cfg, 5).unwrap();
        assert_eq!(a.model, b.model);
        let ck = a.model.to_checkpoint();
        let names: Vec<_> = ck.tensors.iter().map(|(n, _)| n.clone()).collect();
        assert_eq!(names, ["fc1.W", "fc1.b", "fc2.W", "fc2.b", "fc3.W", "fc3.b", "out.W", "out.b"]);
        let p1 = predict(&x, &ck).unwrap();
        assert_eq!(p1, a.model.predict(&x).unwrap());
        assert!(train_classifier(&x, &vec![true; 60], &cfg, 5).is_err());
    }
}
