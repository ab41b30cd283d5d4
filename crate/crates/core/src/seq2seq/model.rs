use rand::Rng;
use serde_json::json;

use super::vectorize::{Example, Seq2SeqVocabs};
use super::Seq2SeqConfig;
use crate::embed::{EmbeddingTable, Vocabulary, END_ID, PAD_ID, START_ID};
use crate::numkit::vecops::{add_assign, argmax, axpy, dot, softmax_in_place};
use crate::numkit::{
    glorot_uniform, lstm_cell_backward, lstm_cell_step_cached, uniform, Checkpoint, LstmCellParams,
    LstmStepCache, Tensor,
};
use crate::{Error, Result};

/// Final recurrent state of an LSTM run.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedState {
    pub h: Tensor,
    pub c: Tensor,
}

impl EncodedState {
    /// Element-wise `h ⊙ c`.
    pub fn hadamard(&self) -> Vec<f64> {
        self.h.data().iter().zip(self.c.data()).map(|(a, b)| a * b).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Seq2SeqModel {
    pub vocabs: Seq2SeqVocabs,
    pub intent_len: usize,
    pub code_len: usize,
    /// `[V_intent × d_intent]`
    pub emb_intent: Tensor,
    /// `[V_code × d_code]`
    pub emb_code: Tensor,
    pub enc: LstmCellParams,
    pub dec: LstmCellParams,
    /// `[h × V_code]`
    pub out_w: Tensor,
    pub out_b: Tensor,
}

/// Gradients of every trainable tensor. Embedding gradients are empty when
/// embeddings are frozen.
#[derive(Clone, Debug)]
pub struct Seq2SeqGrads {
    pub enc: LstmCellParams,
    pub dec: LstmCellParams,
    pub out_w: Vec<f64>,
    pub out_b: Vec<f64>,
    pub emb_intent: Vec<f64>,
    pub emb_code: Vec<f64>,
}

impl Seq2SeqGrads {
    pub fn add_assign(&mut self, other: &Seq2SeqGrads) {
        self.enc.add_assign(&other.enc);
        self.dec.add_assign(&other.dec);
        add_assign(&mut self.out_w, &other.out_w);
        add_assign(&mut self.out_b, &other.out_b);
        add_assign(&mut self.emb_intent, &other.emb_intent);
        add_assign(&mut self.emb_code, &other.emb_code);
    }
}

/// Loss and accuracy tallies over counted decoder positions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    pub loss: f64,
    pub correct: u64,
    pub counted: u64,
}

impl StepStats {
    pub fn add(&mut self, o: StepStats) {
        self.loss += o.loss;
        self.correct += o.correct;
        self.counted += o.counted;
    }

    pub fn mean_loss(&self) -> f64 {
        if self.counted == 0 {
            0.0
        } else {
            self.loss / self.counted as f64
        }
    }

    pub fn accuracy(&self) -> f64 {
        if self.counted == 0 {
            0.0
        } else {
            self.correct as f64 / self.counted as f64
        }
    }
}

fn embedding_matrix<R: Rng + ?Sized>(
    vocab: &Vocabulary,
    table: Option<&EmbeddingTable>,
    dim: usize,
    rng: &mut R,
) -> Tensor {
    match table {
        Some(t) => {
            let mut m = Tensor::zeros(&[vocab.len(), t.dim()]);
            for i in 0..vocab.len() {
                if i != PAD_ID {
                    m.row_mut(i).copy_from_slice(t.vector_or_unk(vocab.token(i)));
                }
            }
            m
        }
        None => {
            let mut m = uniform(rng, &[vocab.len(), dim], -0.05, 0.05);
            m.row_mut(PAD_ID).fill(0.0);
            m
        }
    }
}

impl Seq2SeqModel {
    /// Fresh model. Embedding rows come from the pre-trained tables when
    /// given (OOV tokens take the table's `<UNK>` row, PAD is zero).
    pub fn new<R: Rng + ?Sized>(
        cfg: &Seq2SeqConfig,
        vocabs: Seq2SeqVocabs,
        intent_table: Option<&EmbeddingTable>,
        code_table: Option<&EmbeddingTable>,
        rng: &mut R,
    ) -> Self {
        let emb_intent = embedding_matrix(&vocabs.intent, intent_table, cfg.embed_dim, rng);
        let emb_code = embedding_matrix(&vocabs.code, code_table, cfg.embed_dim, rng);
        let h = cfg.hidden;
        let enc = LstmCellParams::init(rng, emb_intent.cols(), h);
        let dec = LstmCellParams::init(rng, emb_code.cols(), h);
        let vc = vocabs.code.len();
        let out_w = glorot_uniform(rng, &[h, vc], h, vc);
        Seq2SeqModel {
            vocabs,
            intent_len: cfg.intent_len,
            code_len: cfg.code_len,
            emb_intent,
            emb_code,
            enc,
            dec,
            out_w,
            out_b: Tensor::zeros(&[vc]),
        }
    }

    pub fn hidden(&self) -> usize {
        self.enc.hidden()
    }

    pub fn code_vocab_size(&self) -> usize {
        self.out_b.len()
    }

    pub fn zero_grads(&self, with_embeddings: bool) -> Seq2SeqGrads {
        let emb = |t: &Tensor| if with_embeddings { vec![0.0; t.len()] } else { Vec::new() };
        Seq2SeqGrads {
            enc: self.enc.zeros_like(),
            dec: self.dec.zeros_like(),
            out_w: vec![0.0; self.out_w.len()],
            out_b: vec![0.0; self.out_b.len()],
            emb_intent: emb(&self.emb_intent),
            emb_code: emb(&self.emb_code),
        }
    }

    fn check_indices(&self, idx: &[usize], vocab: usize, what: &str) -> Result<()> {
        match idx.iter().find(|&&i| i >= vocab) {
            Some(i) => Err(Error::InvalidArgument(format!("{what} index {i} outside vocabulary of {vocab}"))),
            None => Ok(()),
        }
    }

    /// Runs the encoder over exactly `intent_len` indices, PAD included.
    pub fn encode(&self, intent: &[usize]) -> Result<EncodedState> {
        if intent.len() != self.intent_len {
            return Err(Error::Shape(format!(
                "intent sequence of length {} (expected {})",
                intent.len(),
                self.intent_len
            )));
        }
        self.check_indices(intent, self.emb_intent.rows(), "intent")?;
        let (h, c, _) = self.run_encoder(intent, false);
        Ok(EncodedState {
            h: Tensor::vector(h),
            c: Tensor::vector(c),
        })
    }

    fn run_encoder(&self, intent: &[usize], keep: bool) -> (Vec<f64>, Vec<f64>, Vec<LstmStepCache>) {
        let n = self.hidden();
        let (mut h, mut c) = (vec![0.0; n], vec![0.0; n]);
        let mut caches = Vec::with_capacity(if keep { intent.len() } else { 0 });
        for &tok in intent {
            let (h2, c2, cache) = lstm_cell_step_cached(self.emb_intent.row(tok), &h, &c, &self.enc);
            h = h2;
            c = c2;
            if keep {
                caches.push(cache);
            }
        }
        (h, c, caches)
    }

    fn logits(&self, h: &[f64]) -> Vec<f64> {
        let mut z = self.out_b.data().to_vec();
        let vc = z.len();
        let w = self.out_w.data();
        for (k, &hk) in h.iter().enumerate() {
            if hk != 0.0 {
                axpy(hk, &w[k * vc..(k + 1) * vc], &mut z);
            }
        }
        z
    }

    /// Teacher-forced loss for one example. With `grads`, adds
    /// `scale · ∂loss/∂θ` into it.
    pub fn forward_backward(
        &self,
        ex: &Example,
        mask_pad: bool,
        scale: f64,
        grads: Option<&mut Seq2SeqGrads>,
    ) -> StepStats {
        let keep = grads.is_some();
        let n = self.hidden();
        let (h_enc, c_enc, enc_caches) = self.run_encoder(&ex.intent, keep);

        let steps = ex.dec_in.len();
        let mut stats = StepStats::default();
        let (mut h, mut c) = (h_enc, c_enc);
        let mut dec_caches = Vec::with_capacity(if keep { steps } else { 0 });
        let mut hs = Vec::with_capacity(if keep { steps } else { 0 });
        let mut probs = Vec::with_capacity(if keep { steps } else { 0 });
        for t in 0..steps {
            let (h2, c2, cache) = lstm_cell_step_cached(self.emb_code.row(ex.dec_in[t]), &h, &c, &self.dec);
            h = h2;
            c = c2;
            let counted = !mask_pad || ex.target[t] != PAD_ID;
            let mut p = self.logits(&h);
            softmax_in_place(&mut p);
            if counted {
                let y = ex.target[t];
                stats.loss -= p[y].max(1e-300).ln();
                stats.counted += 1;
                if argmax(&p) == y {
                    stats.correct += 1;
                }
            }
            if keep {
                dec_caches.push(cache);
                hs.push(h.clone());
                probs.push(if counted { Some(p) } else { None });
            }
        }

        let Some(g) = grads else { return stats };
        let vc = self.code_vocab_size();
        let w = self.out_w.data();
        let want_dx = !g.emb_code.is_empty();
        let (mut dh_next, mut dc_next) = (vec![0.0; n], vec![0.0; n]);
        for t in (0..steps).rev() {
            let mut dh = dh_next;
            if let Some(p) = &probs[t] {
                let mut dz: Vec<f64> = p.iter().map(|&x| x * scale).collect();
                dz[ex.target[t]] -= scale;
                add_assign(&mut g.out_b, &dz);
                for k in 0..n {
                    let row = k * vc..(k + 1) * vc;
                    axpy(hs[t][k], &dz, &mut g.out_w[row.clone()]);
                    dh[k] += dot(&w[row], &dz);
                }
            }
            let (dx, dhp, dcp) = lstm_cell_backward(&self.dec, &dec_caches[t], &dh, &dc_next, &mut g.dec, want_dx);
            if want_dx {
                let d = self.emb_code.cols();
                let tok = ex.dec_in[t];
                add_assign(&mut g.emb_code[tok * d..(tok + 1) * d], &dx);
            }
            dh_next = dhp;
            dc_next = dcp;
        }
        let want_dx = !g.emb_intent.is_empty();
        for t in (0..ex.intent.len()).rev() {
            let (dx, dhp, dcp) =
                lstm_cell_backward(&self.enc, &enc_caches[t], &dh_next, &dc_next, &mut g.enc, want_dx);
            if want_dx {
                let d = self.emb_intent.cols();
                let tok = ex.intent[t];
                add_assign(&mut g.emb_intent[tok * d..(tok + 1) * d], &dx);
            }
            dh_next = dhp;
            dc_next = dcp;
        }
        stats
    }

    /// Greedy decoding from `<START>` for up to `max_len` tokens; stops on
    /// `<END>` (not included). Returns the tokens and the decoder's final
    /// state after the last step taken.
    pub fn infer_greedy(&self, intent: &[usize], max_len: usize) -> Result<(Vec<usize>, EncodedState)> {
        let enc = self.encode(intent)?;
        let (mut h, mut c) = (enc.h.into_data(), enc.c.into_data());
        let mut out = Vec::new();
        let mut tok = START_ID;
        for _ in 0..max_len {
            let (h2, c2, _) = lstm_cell_step_cached(self.emb_code.row(tok), &h, &c, &self.dec);
            h = h2;
            c = c2;
            let z = self.logits(&h);
            tok = argmax(&z);
            if tok == END_ID {
                break;
            }
            out.push(tok);
        }
        Ok((
            out,
            EncodedState {
                h: Tensor::vector(h),
                c: Tensor::vector(c),
            },
        ))
    }

    /// Flat parameter vector in checkpoint order (embeddings last), for
    /// gradient checking.
    pub fn flat_params(&self) -> Vec<f64> {
        self.tensors().iter().flat_map(|(_, t)| t.data().to_vec()).collect()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) {
        let mut off = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.data_mut().copy_from_slice(&flat[off..off + n]);
            off += n;
        }
    }

    /// Gradient in the layout of [`flat_params`](Self::flat_params);
    /// frozen embeddings contribute zeros.
    pub fn flat_grads(&self, g: &Seq2SeqGrads) -> Vec<f64> {
        let mut out = Vec::new();
        for (name, t) in self.tensors() {
            let src: &[f64] = match name {
                "enc.W" => g.enc.w.data(),
                "enc.U" => g.enc.u.data(),
                "enc.b" => g.enc.b.data(),
                "dec.W" => g.dec.w.data(),
                "dec.U" => g.dec.u.data(),
                "dec.b" => g.dec.b.data(),
                "out.W" => &g.out_w,
                "out.b" => &g.out_b,
                "emb.intent" => &g.emb_intent,
                _ => &g.emb_code,
            };
            if src.is_empty() {
                out.extend(std::iter::repeat(0.0).take(t.len()));
            } else {
                out.extend_from_slice(src);
            }
        }
        out
    }

    pub fn tensors(&self) -> [(&'static str, &Tensor); 10] {
        [
            ("enc.W", &self.enc.w),
            ("enc.U", &self.enc.u),
            ("enc.b", &self.enc.b),
            ("dec.W", &self.dec.w),
            ("dec.U", &self.dec.u),
            ("dec.b", &self.dec.b),
            ("out.W", &self.out_w),
            ("out.b", &self.out_b),
            ("emb.intent", &self.emb_intent),
            ("emb.code", &self.emb_code),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 10] {
        [
            &mut self.enc.w,
            &mut self.enc.u,
            &mut self.enc.b,
            &mut self.dec.w,
            &mut self.dec.u,
            &mut self.dec.b,
            &mut self.out_w,
            &mut self.out_b,
            &mut self.emb_intent,
            &mut self.emb_code,
        ]
    }

    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        let mut ck = Checkpoint::new();
        ck.meta.insert("model".into(), json!("seq2seq"));
        ck.meta.insert("intent_len".into(), json!(self.intent_len));
        ck.meta.insert("code_len".into(), json!(self.code_len));
        ck.meta.insert("hidden".into(), json!(self.hidden()));
        ck.meta.insert("intent_vocab".into(), serde_json::to_value(&self.vocabs.intent)?);
        ck.meta.insert("code_vocab".into(), serde_json::to_value(&self.vocabs.code)?);
        for (name, t) in self.tensors() {
            ck.push(name, t.clone());
        }
        Ok(ck)
    }

    pub fn from_checkpoint(mut ck: Checkpoint) -> Result<Self> {
        let meta_usize = |k: &str| {
            ck.meta
                .get(k)
                .and_then(|v| v.as_u64())
                .map(|v| v as usize)
                .ok_or_else(|| Error::Format(format!("seq2seq checkpoint lacks {k}")))
        };
        let (intent_len, code_len, h) = (meta_usize("intent_len")?, meta_usize("code_len")?, meta_usize("hidden")?);
        let vocab = |k: &str| -> Result<Vocabulary> {
            let v = ck
                .meta
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Format(format!("seq2seq checkpoint lacks {k}")))?;
            Ok(serde_json::from_value(v)?)
        };
        let vocabs = Seq2SeqVocabs {
            intent: vocab("intent_vocab")?,
            code: vocab("code_vocab")?,
        };
        let (vi, vc) = (vocabs.intent.len(), vocabs.code.len());
        let emb_intent = ck.take("emb.intent")?;
        let emb_code = ck.take("emb.code")?;
        emb_intent.expect_shape(&[vi, emb_intent.cols()], "emb.intent")?;
        emb_code.expect_shape(&[vc, emb_code.cols()], "emb.code")?;
        let (di, dc) = (emb_intent.cols(), emb_code.cols());
        let mut lstm = |p: &str, d: usize| -> Result<LstmCellParams> {
            let w = ck.take(&format!("{p}.W"))?;
            let u = ck.take(&format!("{p}.U"))?;
            let b = ck.take(&format!("{p}.b"))?;
            w.expect_shape(&[4 * h, d], &format!("{p}.W"))?;
            u.expect_shape(&[4 * h, h], &format!("{p}.U"))?;
            b.expect_shape(&[4 * h], &format!("{p}.b"))?;
            Ok(LstmCellParams { w, u, b })
        };
        let enc = lstm("enc", di)?;
        let dec = lstm("dec", dc)?;
        let out_w = ck.take("out.W")?;
        let out_b = ck.take("out.b")?;
        out_w.expect_shape(&[h, vc], "out.W")?;
        out_b.expect_shape(&[vc], "out.b")?;
        Ok(Seq2SeqModel {
            vocabs,
            intent_len,
            code_len,
            emb_intent,
            emb_code,
            enc,
            dec,
            out_w,
            out_b,
        })
    }
}
