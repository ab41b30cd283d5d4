use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cooccur::CooccurrenceMatrix;
use super::table::{Algorithm, EmbeddingMeta, EmbeddingTable};
use super::vocab::Vocabulary;
use crate::numkit::vecops::dot;
use crate::numkit::{uniform, Tensor};
use crate::{Error, Result};

const COST_CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GloveConfig {
    pub dim: usize,
    pub epochs: usize,
    pub lr: f64,
    pub x_max: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for GloveConfig {
    fn default() -> Self {
        GloveConfig {
            dim: 100,
            epochs: 10,
            lr: 0.05,
            x_max: 100.0,
            alpha: 0.75,
            seed: 0,
        }
    }
}

impl GloveConfig {
    pub fn weight(&self, x: f64) -> f64 {
        if x < self.x_max {
            (x / self.x_max).powf(self.alpha)
        } else {
            1.0
        }
    }
}

#[derive(Clone, Debug)]
pub struct GloveOutput {
    /// Rows are `w + w̃`.
    pub table: EmbeddingTable,
    /// Objective after each epoch.
    pub epoch_cost: Vec<f64>,
}

struct Params {
    w: Vec<f64>,
    wt: Vec<f64>,
    b: Vec<f64>,
    bt: Vec<f64>,
    dim: usize,
}

impl Params {
    fn residual(&self, i: usize, j: usize, x: f64) -> f64 {
        let d = self.dim;
        dot(&self.w[i * d..(i + 1) * d], &self.wt[j * d..(j + 1) * d]) + self.b[i] + self.bt[j] - x.ln()
    }
}

/// Weighted least squares `J = Σ f(X_ij)(w_i·w̃_j + b_i + b̃_j − ln X_ij)²`
/// over the positive entries, minimised by per-entry AdaGrad with a shuffled
/// visiting order each epoch. Accumulators start at 1.
pub fn train_glove(
    x: &CooccurrenceMatrix,
    vocab: &Vocabulary,
    cfg: &GloveConfig,
    corpus_tag: &str,
    window: usize,
    min_count: u64,
) -> Result<GloveOutput> {
    let entries: Vec<(usize, usize, f64)> = x
        .entries
        .iter()
        .filter(|e| e.2 > 0.0)
        .map(|&(i, j, v)| (i as usize, j as usize, v))
        .collect();
    if entries.is_empty() {
        return Err(Error::InvalidArgument("co-occurrence matrix has no positive entries".into()));
    }
    if x.size != vocab.len() {
        return Err(Error::Shape(format!(
            "co-occurrence size {} vs vocabulary {}",
            x.size,
            vocab.len()
        )));
    }
    if cfg.dim == 0 {
        return Err(Error::InvalidArgument("GloVe dim must be positive".into()));
    }
    let (v, d) = (vocab.len(), cfg.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let half = 0.5 / d as f64;
    let mut p = Params {
        w: uniform(&mut rng, &[v, d], -half, half).into_data(),
        wt: uniform(&mut rng, &[v, d], -half, half).into_data(),
        b: vec![0.0; v],
        bt: vec![0.0; v],
        dim: d,
    };
    let mut gw = vec![1.0f64; v * d];
    let mut gwt = vec![1.0f64; v * d];
    let mut gb = vec![1.0f64; v];
    let mut gbt = vec![1.0f64; v];
    let weights: Vec<f64> = entries.iter().map(|e| cfg.weight(e.2)).collect();

    let mut order: Vec<usize> = (0..entries.len()).collect();
    let mut epoch_cost = Vec::with_capacity(cfg.epochs);
    let mut dw = vec![0.0f64; d];
    let mut dwt = vec![0.0f64; d];
    for e in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            let (i, j, xv) = entries[k];
            let fdiff = weights[k] * p.residual(i, j, xv);
            let (ri, rj) = (i * d..(i + 1) * d, j * d..(j + 1) * d);
            for t in 0..d {
                dw[t] = fdiff * p.wt[rj.start + t];
                dwt[t] = fdiff * p.w[ri.start + t];
            }
            for t in 0..d {
                let (a, b) = (ri.start + t, rj.start + t);
                p.w[a] -= cfg.lr * dw[t] / gw[a].sqrt();
                p.wt[b] -= cfg.lr * dwt[t] / gwt[b].sqrt();
                gw[a] += dw[t] * dw[t];
                gwt[b] += dwt[t] * dwt[t];
            }
            p.b[i] -= cfg.lr * fdiff / gb[i].sqrt();
            p.bt[j] -= cfg.lr * fdiff / gbt[j].sqrt();
            gb[i] += fdiff * fdiff;
            gbt[j] += fdiff * fdiff;
        }
        let cost = objective(&p, &entries, &weights);
        if !cost.is_finite() {
            return Err(Error::NonFinite(format!("GloVe objective at epoch {}", e + 1)));
        }
        log::debug!("glove epoch {} J {:.6}", e + 1, cost);
        epoch_cost.push(cost);
    }

    let sum: Vec<f64> = p.w.iter().zip(&p.wt).map(|(a, b)| a + b).collect();
    let meta = EmbeddingMeta {
        algorithm: Algorithm::Glove,
        corpus: corpus_tag.to_string(),
        window,
        min_count,
        epochs: cfg.epochs,
        dim: d,
        seed: Some(cfg.seed),
    };
    Ok(GloveOutput {
        table: EmbeddingTable::new(vocab.clone(), Tensor::new(vec![v, d], sum)?, meta)?,
        epoch_cost,
    })
}

fn objective(p: &Params, entries: &[(usize, usize, f64)], weights: &[f64]) -> f64 {
    let idx: Vec<usize> = (0..entries.len()).collect();
    crate::par::map_reduce_chunks(
        &idx,
        COST_CHUNK,
        || 0.0,
        |acc, &k| {
            let (i, j, x) = entries[k];
            let r = p.residual(i, j, x);
            *acc += weights[k] * r * r;
        },
        |acc, part| *acc += part,
    )
    .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair_fixed_point() {
        let corpus = vec![vec!["a".to_string(), "b".to_string()]];
        let vocab = Vocabulary::build(&corpus, 1, 10);
        let (a, b) = (vocab.index_of("a").unwrap() as u32, vocab.index_of("b").unwrap() as u32);
        let e = std::f64::consts::E;
        let x = CooccurrenceMatrix {
            size: vocab.len(),
            entries: vec![(a, b, e), (b, a, e)],
        };
        let cfg = GloveConfig {
            dim: 1,
            epochs: 3000,
            lr: 0.1,
            x_max: 1.0,
            ..GloveConfig::default()
        };
        let out = train_glove(&x, &vocab, &cfg, "t", 1, 1).unwrap();
        assert!(out.epoch_cost.last().unwrap() < &(0.05f64 * 0.05));
    }

    #[test]
    fn empty_matrix_errors() {
        let vocab = Vocabulary::default();
        let x = CooccurrenceMatrix {
            size: vocab.len(),
            entries: vec![(4, 5, 0.0)],
        };
        assert!(train_glove(&x, &vocab, &GloveConfig::default(), "t", 1, 1).is_err());
    }

    #[test]
    fn weighting() {
        let c = GloveConfig::default();
        assert_eq!(c.weight(100.0), 1.0);
        assert_eq!(c.weight(250.0), 1.0);
        assert!((c.weight(50.0) - 0.5f64.powf(0.75)).abs() < 1e-15);
    }
}
