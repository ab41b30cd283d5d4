//! Vocabularies and pre-trained embeddings over intent words and code tokens.
//!
//! `min_count` everywhere means "drop tokens whose count is below it". The
//! intent preset therefore uses 2 to exclude words seen only once.

mod cooccur;
mod glove;
mod pca;
mod skipgram;
mod table;
mod vocab;

pub use cooccur::{build_cooccurrence, CooccurrenceMatrix};
pub use glove::{train_glove, GloveConfig, GloveOutput};
pub use pca::{pca, pca_project, projection_csv, symmetric_eigen, PcaProjection};
pub use skipgram::{train_skipgram, SkipgramConfig, SkipgramOutput};
pub use table::{average_embedding, average_indices, sidecar_path, Algorithm, EmbeddingMeta, EmbeddingTable};
pub use vocab::{csv_field, frequency_csv, Vocabulary, END_ID, NUM_SPECIALS, PAD_ID, START_ID, UNK_ID};

use serde::{Deserialize, Serialize};

/// Which token corpus an embedding is trained on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusTag {
    Intent,
    /// Normalized code tokens of the curated corpus.
    Current,
    /// Current corpus plus the development corpus.
    CurrentDev,
}

impl CorpusTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CorpusTag::Intent => "intent",
            CorpusTag::Current => "current",
            CorpusTag::CurrentDev => "current+dev",
        }
    }
}

/// Named training recipe for one embedding table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedPreset {
    pub name: String,
    pub algorithm: Algorithm,
    pub corpus: CorpusTag,
    pub window: usize,
    pub min_count: u64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub epochs: usize,
}

fn default_dim() -> usize {
    100
}

impl EmbedPreset {
    fn new(name: &str, algorithm: Algorithm, corpus: CorpusTag, window: usize, min_count: u64, epochs: usize) -> Self {
        EmbedPreset {
            name: name.to_string(),
            algorithm,
            corpus,
            window,
            min_count,
            dim: 100,
            epochs,
        }
    }

    /// Skip-gram over cleaned intent words, window 4.
    pub fn intent() -> Self {
        EmbedPreset::new("intent-w2v", Algorithm::W2v, CorpusTag::Intent, 4, 2, 15)
    }

    /// The four code presets: {w2v, glove} × {current, current+dev}.
    pub fn code_presets() -> Vec<Self> {
        vec![
            EmbedPreset::new("w2v-current", Algorithm::W2v, CorpusTag::Current, 15, 1, 10),
            EmbedPreset::new("glove-current", Algorithm::Glove, CorpusTag::Current, 15, 1, 10),
            EmbedPreset::new("w2v-csn", Algorithm::W2v, CorpusTag::CurrentDev, 15, 5, 10),
            EmbedPreset::new("glove-csn", Algorithm::Glove, CorpusTag::CurrentDev, 15, 1, 10),
        ]
    }
}
