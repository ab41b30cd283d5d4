use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codelex::{END, PAD, START, UNK};
use crate::{Error, Result};

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const START_ID: usize = 2;
pub const END_ID: usize = 3;
pub const NUM_SPECIALS: usize = 4;

/// Token ↔ index map. Indices 0..4 are `<PAD>`, `<UNK>`, `<START>`,
/// `<END>`; the rest follow descending count, ties lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabFile", into = "VocabFile")]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    tokens: Vec<String>,
    counts: Vec<u64>,
}

impl From<VocabFile> for Vocabulary {
    fn from(f: VocabFile) -> Self {
        Vocabulary::from_parts(f.tokens, f.counts)
    }
}

impl From<Vocabulary> for VocabFile {
    fn from(v: Vocabulary) -> Self {
        VocabFile {
            tokens: v.tokens,
            counts: v.counts,
        }
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::from_parts(Vec::new(), Vec::new())
    }
}

impl Vocabulary {
    /// Builds from non-special entries already in canonical order; specials
    /// are prepended.
    fn from_parts(mut tokens: Vec<String>, mut counts: Vec<u64>) -> Self {
        if tokens.first().map(String::as_str) != Some(PAD) {
            let specials = [PAD, UNK, START, END].map(String::from);
            tokens.splice(0..0, specials);
            counts.splice(0..0, [0; NUM_SPECIALS]);
        }
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            tokens,
            counts,
            index,
        }
    }

    /// Counts tokens, drops those with count `< min_count`, keeps the `cap`
    /// most frequent. Special spellings in the corpus are ignored.
    pub fn build<S: AsRef<str>>(corpus: &[Vec<S>], min_count: u64, cap: usize) -> Self {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for seq in corpus {
            for t in seq {
                *counts.entry(t.as_ref()).or_insert(0) += 1;
            }
        }
        let specials = [PAD, UNK, START, END];
        let mut entries: Vec<(&str, u64)> = counts
            .into_iter()
            .filter(|(t, c)| *c >= min_count && !specials.contains(t))
            .collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        entries.truncate(cap);
        Vocabulary::from_parts(
            entries.iter().map(|(t, _)| t.to_string()).collect(),
            entries.iter().map(|(_, c)| *c).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= NUM_SPECIALS
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn index_or_unk(&self, token: &str) -> usize {
        self.index_of(token).unwrap_or(UNK_ID)
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts[index]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Non-special entries in order, with counts.
    pub fn entries(&self) -> impl Iterator<Item = (&str, u64)> {
        self.tokens
            .iter()
            .zip(&self.counts)
            .skip(NUM_SPECIALS)
            .map(|(t, &c)| (t.as_str(), c))
    }

    pub fn top(&self, n: usize) -> Vec<(String, u64)> {
        self.entries().take(n).map(|(t, c)| (t.to_string(), c)).collect()
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.index_or_unk(t.as_ref())).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Frequency report as CSV `token,count`, for the `n` most frequent tokens.
pub fn frequency_csv(vocab: &Vocabulary, n: usize) -> String {
    let mut out = String::from("token,count\n");
    for (t, c) in vocab.top(n) {
        out.push_str(&csv_field(&t));
        out.push(',');
        out.push_str(&c.to_string());
        out.push('\n');
    }
    out
}

/// Quotes a CSV field when it contains separators, quotes or line breaks.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
