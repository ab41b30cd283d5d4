use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Sample;
use crate::embed::{average_embedding, EmbeddingTable, PAD_ID};
use crate::numkit::{read_checkpoint, write_checkpoint, Checkpoint, Tensor};
use crate::seq2seq::{intent_indices, EncodedState, Seq2SeqModel};
use crate::{Error, Result};

/// How the code vector of a pair is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[serde(alias = "w2v-current")]
    AvgW2vCurrent,
    #[serde(alias = "glove-current")]
    AvgGloveCurrent,
    #[serde(alias = "w2v-csn")]
    AvgW2vCsn,
    #[serde(alias = "glove-csn")]
    AvgGloveCsn,
    #[serde(alias = "hidden")]
    HiddenState,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::AvgW2vCurrent,
        Variant::AvgGloveCurrent,
        Variant::AvgW2vCsn,
        Variant::AvgGloveCsn,
        Variant::HiddenState,
    ];

    /// Short name used on the command line and in file names.
    pub fn cli_name(self) -> &'static str {
        match self {
            Variant::AvgW2vCurrent => "w2v-current",
            Variant::AvgGloveCurrent => "glove-current",
            Variant::AvgW2vCsn => "w2v-csn",
            Variant::AvgGloveCsn => "glove-csn",
            Variant::HiddenState => "hidden",
        }
    }

    /// Code embedding preset this variant averages over, if any.
    pub fn code_preset(self) -> Option<&'static str> {
        match self {
            Variant::HiddenState => None,
            v => Some(v.cli_name()),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.cli_name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Variant::ALL.iter().map(|v| v.cli_name()).collect();
                Error::InvalidArgument(format!("unknown variant {s:?} (expected one of {})", names.join(", ")))
            })
    }
}

/// Which LSTM state feeds the hidden-state variant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenSource {
    /// Decoder state after greedy decoding.
    #[default]
    Decoder,
    Encoder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairFeatures {
    pub intent_vec: Vec<f64>,
    pub code_vec: Vec<f64>,
    pub label: bool,
}

/// `h ⊙ c`.
pub fn code_vec_hadamard(state: &EncodedState) -> Result<Tensor> {
    if state.h.shape() != state.c.shape() {
        return Err(Error::Shape(format!(
            "hidden {:?} vs cell {:?}",
            state.h.shape(),
            state.c.shape()
        )));
    }
    Ok(Tensor::vector(state.hadamard()))
}

/// Average code embedding of decoded tokens; `<PAD>` predictions are
/// ignored.
pub fn code_vec_average<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> Tensor {
    let kept: Vec<&str> = tokens
        .iter()
        .map(|t| t.as_ref())
        .filter(|t| *t != crate::codelex::PAD)
        .collect();
    average_embedding(&kept, table)
}

pub struct FeatureInputs<'a> {
    pub model: &'a Seq2SeqModel,
    pub intent_table: &'a EmbeddingTable,
    /// Required for the averaged variants.
    pub code_table: Option<&'a EmbeddingTable>,
    pub variant: Variant,
    pub hidden_source: HiddenSource,
}

/// Features for labelled samples, in input order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    pub variant: Variant,
    pub features: Vec<PairFeatures>,
}

fn one(sample: &Sample, inp: &FeatureInputs) -> Result<PairFeatures> {
    let label = match sample.label {
        Some(1) => true,
        Some(0) => false,
        other => {
            return Err(Error::InvalidArgument(format!(
                "question {} has label {other:?}, expected 0 or 1",
                sample.question_id
            )))
        }
    };
    let words: Vec<&str> = sample.intent.split_whitespace().collect();
    let intent_vec = average_embedding(&words, inp.intent_table).into_data();
    let model = inp.model;
    let idx = intent_indices(&words, &model.vocabs.intent, model.intent_len);
    let code_vec = match (inp.variant, inp.hidden_source) {
        (Variant::HiddenState, HiddenSource::Encoder) => code_vec_hadamard(&model.encode(&idx)?)?.into_data(),
        (Variant::HiddenState, HiddenSource::Decoder) => {
            let (_, state) = model.infer_greedy(&idx, model.code_len)?;
            code_vec_hadamard(&state)?.into_data()
        }
        (v, _) => {
            let table = inp.code_table.ok_or_else(|| {
                Error::InvalidArgument(format!("variant {} needs a code embedding table", v.cli_name()))
            })?;
            let (decoded, _) = model.infer_greedy(&idx, model.code_len)?;
            let toks: Vec<&str> = decoded
                .iter()
                .filter(|&&i| i != PAD_ID)
                .map(|&i| model.vocabs.code.token(i))
                .collect();
            code_vec_average(&toks, table).into_data()
        }
    };
    let f = PairFeatures {
        intent_vec,
        code_vec,
        label,
    };
    if !f.intent_vec.iter().chain(&f.code_vec).all(|x| x.is_finite()) {
        return Err(Error::NonFinite(format!("features of question {}", sample.question_id)));
    }
    Ok(f)
}

pub fn build_features(samples: &[Sample], inp: &FeatureInputs) -> Result<FeatureSet> {
    let features = crate::par::map(samples, |s| one(s, inp))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureSet {
        variant: inp.variant,
        features,
    })
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    variant: Variant,
    n: usize,
    intent_dim: usize,
    code_dim: usize,
    #[serde(default)]
    provenance: serde_json::Map<String, serde_json::Value>,
}

impl FeatureSet {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    fn dims(&self) -> (usize, usize) {
        self.features
            .first()
            .map_or((0, 0), |f| (f.intent_vec.len(), f.code_vec.len()))
    }

    /// `[n × (d_intent + d_code)]` design matrix and labels.
    pub fn matrix(&self) -> Result<(Tensor, Vec<bool>)> {
        let (di, dc) = self.dims();
        let mut data = Vec::with_capacity(self.len() * (di + dc));
        for (k, f) in self.features.iter().enumerate() {
            if f.intent_vec.len() != di || f.code_vec.len() != dc {
                return Err(Error::Shape(format!("feature row {k} has inconsistent dimensions")));
            }
            data.extend_from_slice(&f.intent_vec);
            data.extend_from_slice(&f.code_vec);
        }
        let x = Tensor::new(vec![self.len(), di + dc], data)?;
        Ok((x, self.features.iter().map(|f| f.label).collect()))
    }

    /// Writes `X` and `y` as SNF1 tensors plus a `<path>.json` sidecar.
    pub fn save(&self, path: &Path, provenance: serde_json::Map<String, serde_json::Value>) -> Result<()> {
        let (x, y) = self.matrix()?;
        let (di, dc) = self.dims();
        let mut ck = Checkpoint::new();
        ck.push("X", x);
        ck.push("y", Tensor::vector(y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()));
        write_checkpoint(path, &ck)?;
        let side = sidecar(path);
        let meta = Sidecar {
            variant: self.variant,
            n: self.len(),
            intent_dim: di,
            code_dim: dc,
            provenance,
        };
        std::fs::write(&side, serde_json::to_string_pretty(&meta)?).map_err(|e| Error::io(&side, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let side = sidecar(path);
        let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let meta: Sidecar = serde_json::from_str(&text)?;
        let ck = read_checkpoint(path)?;
        let x = ck.expect("X", &[meta.n, meta.intent_dim + meta.code_dim])?;
        let y = ck.expect("y", &[meta.n])?;
        let features = (0..meta.n)
            .map(|i| {
                let row = x.row(i);
                PairFeatures {
                    intent_vec: row[..meta.intent_dim].to_vec(),
                    code_vec: row[meta.intent_dim..].to_vec(),
                    label: y.data()[i] > 0.5,
                }
            })
            .collect();
        Ok(FeatureSet {
            variant: meta.variant,
            features,
        })
    }
}

fn sidecar(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard() {
        let s = EncodedState {
            h: Tensor::vector(vec![1.0, 2.0]),
            c: Tensor::vector(vec![3.0, 4.0]),
        };
        assert_eq!(code_vec_hadamard(&s).unwrap().data(), &[3.0, 8.0]);
        let z = EncodedState {
            h: Tensor::vector(vec![1.0, 2.0]),
            c: Tensor::vector(vec![0.0, 0.0]),
        };
        assert!(code_vec_hadamard(&z).unwrap().data().iter().all(|&x| x == 0.0));
        let bad = EncodedState {
            h: Tensor::vector(vec![1.0]),
            c: Tensor::vector(vec![0.0, 0.0]),
        };
        assert!(code_vec_hadamard(&bad).is_err());
    }

    #[test]
    fn variant_names() {
        for v in Variant::ALL {
            assert_eq!(v.cli_name().parse::<Variant>().unwrap(), v);
        }
        assert!("w2v".parse::<Variant>().is_err());
        assert_eq!(serde_json::to_string(&Variant::AvgW2vCsn).unwrap(), "\"avg_w2v_csn\"");
    }

    #[test]
    fn cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.snf");
        let fs = FeatureSet {
            variant: Variant::HiddenState,
            features: vec![
                PairFeatures { intent_vec: vec![0.5, 1.0], code_vec: vec![2.0], label: true },
                PairFeatures { intent_vec: vec![0.25, 0.0], code_vec: vec![-1.0], label: false },
            ],
        };
        fs.save(&p, Default::default()).unwrap();
        assert_eq!(FeatureSet::load(&p).unwrap(), fs);
    }
}
