use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::vocab::{Vocabulary, UNK_ID};
use crate::numkit::Tensor;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    W2v,
    Glove,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::W2v => "w2v",
            Algorithm::Glove => "glove",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    pub algorithm: Algorithm,
    pub corpus: String,
    pub window: usize,
    pub min_count: u64,
    pub epochs: usize,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Vocabulary plus one `dim`-vector per token (row `i` is token `i`).
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub vocab: Vocabulary,
    pub matrix: Tensor,
    pub meta: EmbeddingMeta,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    meta: EmbeddingMeta,
    vocab: Vocabulary,
}

impl EmbeddingTable {
    pub fn new(vocab: Vocabulary, matrix: Tensor, meta: EmbeddingMeta) -> Result<Self> {
        matrix.expect_shape(&[vocab.len(), meta.dim], "embedding matrix")?;
        Ok(EmbeddingTable { vocab, matrix, meta })
    }

    pub fn dim(&self) -> usize {
        self.meta.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.vocab.index_of(token).map(|i| self.matrix.row(i))
    }

    /// Row for `token`, falling back to the `<UNK>` row.
    pub fn vector_or_unk(&self, token: &str) -> &[f64] {
        self.matrix.row(self.vocab.index_or_unk(token))
    }

    /// `k` nearest tokens to `token` by cosine, excluding itself and the
    /// special rows.
    pub fn nearest(&self, token: &str, k: usize) -> Vec<(String, f64)> {
        let Some(q) = self.vocab.index_of(token) else {
            return Vec::new();
        };
        let qv = self.matrix.row(q);
        let mut scored: Vec<(usize, f64)> = (super::NUM_SPECIALS..self.len())
            .filter(|&i| i != q)
            .map(|i| (i, crate::numkit::vecops::cosine(qv, self.matrix.row(i))))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored
            .into_iter()
            .take(k)
            .map(|(i, s)| (self.vocab.token(i).to_string(), s))
            .collect()
    }

    /// Writes the text format (`V d` header, then `token v1 .. vd`) and a
    /// `<path>.meta.json` sidecar holding metadata and token counts.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "{} {}", self.len(), self.dim()).map_err(io)?;
        let mut line = String::new();
        for i in 0..self.len() {
            line.clear();
            line.push_str(&escape_token(self.vocab.token(i)));
            for v in self.matrix.row(i) {
                // Shortest round-trip representation.
                write!(line, " {v}").expect("write to string");
            }
            writeln!(w, "{line}").map_err(io)?;
        }
        w.flush().map_err(io)?;
        let side = sidecar_path(path);
        let text = serde_json::to_string_pretty(&Sidecar {
            meta: self.meta.clone(),
            vocab: self.vocab.clone(),
        })?;
        std::fs::write(&side, text).map_err(|e| Error::io(&side, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let side = sidecar_path(path);
        let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let Sidecar { meta, vocab } = serde_json::from_str(&text)?;
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let bad = |msg: String| Error::Format(format!("{}: {msg}", path.display()));
        let header = lines
            .next()
            .ok_or_else(|| bad("empty embedding file".into()))?
            .map_err(|e| Error::io(path, e))?;
        let (v, d) = parse_header(&header).ok_or_else(|| bad(format!("bad header {header:?}")))?;
        if v != vocab.len() || d != meta.dim {
            return Err(bad(format!(
                "header {v}x{d} disagrees with sidecar {}x{}",
                vocab.len(),
                meta.dim
            )));
        }
        let mut data = Vec::with_capacity(v * d);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let tok = unescape_token(parts.next().unwrap_or_default());
            if i >= v || tok != vocab.token(i) {
                return Err(bad(format!("line {}: unexpected token {tok:?}", i + 2)));
            }
            let before = data.len();
            for p in parts {
                let x: f64 = p.parse().map_err(|_| bad(format!("line {}: bad number {p:?}", i + 2)))?;
                data.push(x);
            }
            if data.len() - before != d {
                return Err(bad(format!("line {}: expected {d} values", i + 2)));
            }
        }
        if data.len() != v * d {
            return Err(bad(format!("expected {v} rows")));
        }
        EmbeddingTable::new(vocab, Tensor::new(vec![v, d], data)?, meta)
    }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let v = it.next()?.parse().ok()?;
    let d = it.next()?.parse().ok()?;
    it.next().is_none().then_some((v, d))
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Tokens may hold spaces (string literals); escape them so each line
/// splits cleanly on single spaces.
fn escape_token(tok: &str) -> String {
    let mut out = String::with_capacity(tok.len());
    for c in tok.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            ' ' => out.push_str("\\s"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape_token(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('s') => out.push(' '),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

/// Mean of the token vectors; OOV tokens use the `<UNK>` row and an empty
/// sequence gives zeros.
pub fn average_embedding<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> Tensor {
    let mut acc = vec![0.0; table.dim()];
    for t in tokens {
        let i = table.vocab.index_or_unk(t.as_ref());
        crate::numkit::vecops::add_assign(&mut acc, table.matrix.row(i));
    }
    if !tokens.is_empty() {
        let n = tokens.len() as f64;
        acc.iter_mut().for_each(|x| *x /= n);
    }
    Tensor::vector(acc)
}

/// Same as [`average_embedding`] over vocabulary indices.
pub fn average_indices(indices: &[usize], table: &EmbeddingTable) -> Vec<f64> {
    let mut acc = vec![0.0; table.dim()];
    for &i in indices {
        let i = if i < table.len() { i } else { UNK_ID };
        crate::numkit::vecops::add_assign(&mut acc, table.matrix.row(i));
    }
    if !indices.is_empty() {
        let n = indices.len() as f64;
        acc.iter_mut().for_each(|x| *x /= n);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, [f64; 2])]) -> EmbeddingTable {
        let corpus: Vec<Vec<String>> = vec![rows.iter().map(|r| r.0.to_string()).collect()];
        let vocab = Vocabulary::build(&corpus, 1, 100);
        let mut m = Tensor::zeros(&[vocab.len(), 2]);
        m.row_mut(UNK_ID).copy_from_slice(&[-1.0, 5.0]);
        for (t, v) in rows {
            m.row_mut(vocab.index_of(t).unwrap()).copy_from_slice(v);
        }
        let meta = EmbeddingMeta {
            algorithm: Algorithm::W2v,
            corpus: "test".into(),
            window: 1,
            min_count: 1,
            epochs: 0,
            dim: 2,
            seed: None,
        };
        EmbeddingTable::new(vocab, m, meta).unwrap()
    }

    #[test]
    fn averaging() {
        let t = table(&[("a", [1.0, 1.0]), ("b", [3.0, 3.0])]);
        assert_eq!(average_embedding(&["a"], &t).data(), &[1.0, 1.0]);
        assert_eq!(average_embedding(&["a", "b"], &t).data(), &[2.0, 2.0]);
        assert_eq!(average_embedding(&["zz", "qq"], &t).data(), &[-1.0, 5.0]);
        assert_eq!(average_embedding::<&str>(&[], &t).data(), &[0.0, 0.0]);
        assert_eq!(average_indices(&[4, 5], &t), vec![2.0, 2.0]);
    }

    #[test]
    fn escaping_roundtrip() {
        for tok in ["'a b'", "x\\s", "\t\n", "plain", "\\"] {
            let e = escape_token(tok);
            assert!(!e.contains(' '));
            assert_eq!(unescape_token(&e), tok);
        }
    }

    #[test]
    fn save_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("emb.txt");
        let t = table(&[("'hello world'", [0.1, 1e-17]), ("b", [3.0, -2.5])]);
        t.save(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("6 2\n"));
        let back = EmbeddingTable::load(&p).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn nearest_skips_self_and_specials() {
        let t = table(&[("a", [1.0, 0.0]), ("b", [0.9, 0.1]), ("c", [0.0, 1.0])]);
        let nn = t.nearest("a", 5);
        assert_eq!(nn[0].0, "b");
        assert_eq!(nn.len(), 2);
    }
}
