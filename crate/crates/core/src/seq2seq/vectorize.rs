use serde::{Deserialize, Serialize};

use super::Seq2SeqConfig;
use crate::codelex::{lex_and_normalize, ApiWhitelist, LexError};
use crate::corpus::Sample;
use crate::embed::{Vocabulary, END_ID, PAD_ID, START_ID};

/// Intent words and normalized code tokens of one pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairTokens {
    pub intent: Vec<String>,
    pub code: Vec<String>,
}

/// Whitespace-splits the (already cleaned) intent and lexes and normalizes
/// the snippet.
pub fn pair_tokens(sample: &Sample, whitelist: &ApiWhitelist) -> Result<PairTokens, LexError> {
    Ok(PairTokens {
        intent: sample.intent.split_whitespace().map(String::from).collect(),
        code: lex_and_normalize(&sample.snippet, whitelist)?.into_texts(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seq2SeqVocabs {
    pub intent: Vocabulary,
    pub code: Vocabulary,
}

impl Seq2SeqVocabs {
    /// Top-`cap` vocabularies over the given pairs (no minimum count).
    pub fn build(pairs: &[PairTokens], cfg: &Seq2SeqConfig) -> Self {
        let intents: Vec<&[String]> = pairs.iter().map(|p| p.intent.as_slice()).collect();
        let codes: Vec<&[String]> = pairs.iter().map(|p| p.code.as_slice()).collect();
        Seq2SeqVocabs {
            intent: Vocabulary::build(&to_owned(&intents), 1, cfg.intent_vocab_cap),
            code: Vocabulary::build(&to_owned(&codes), 1, cfg.code_vocab_cap),
        }
    }
}

fn to_owned(seqs: &[&[String]]) -> Vec<Vec<String>> {
    seqs.iter().map(|s| s.to_vec()).collect()
}

/// Intent words as indices, truncated or PAD-filled to `len`.
pub fn intent_indices<S: AsRef<str>>(words: &[S], vocab: &Vocabulary, len: usize) -> Vec<usize> {
    let mut out: Vec<usize> = words.iter().take(len).map(|t| vocab.index_or_unk(t.as_ref())).collect();
    out.resize(len, PAD_ID);
    out
}

/// Index sequences for one pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub intent: Vec<usize>,
    pub dec_in: Vec<usize>,
    pub target: Vec<usize>,
}

/// Maps tokens to indices (UNK for OOV), pads/truncates the intent to
/// `intent_len`, keeps at most `code_len` code tokens, and builds
/// `[START] + code` and `code + [END]`, both PAD-filled to `code_len + 1`.
pub fn vectorize(pair: &PairTokens, cfg: &Seq2SeqConfig, vocabs: &Seq2SeqVocabs) -> Example {
    let intent = intent_indices(&pair.intent, &vocabs.intent, cfg.intent_len);

    let code: Vec<usize> = pair
        .code
        .iter()
        .take(cfg.code_len)
        .map(|t| vocabs.code.index_or_unk(t))
        .collect();
    let n = cfg.decoder_len();
    let mut dec_in = Vec::with_capacity(n);
    dec_in.push(START_ID);
    dec_in.extend_from_slice(&code);
    dec_in.resize(n, PAD_ID);
    let mut target = code;
    target.push(END_ID);
    target.resize(n, PAD_ID);
    Example { intent, dec_in, target }
}
