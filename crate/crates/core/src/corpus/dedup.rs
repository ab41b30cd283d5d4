use std::collections::{BTreeMap, HashMap, HashSet};

use super::Sample;
use crate::codelex::{tokenize, LexError};
use crate::embed::Vocabulary;

/// Sparse bag-of-tokens count vector.
type CountVec = BTreeMap<String, f64>;

fn count_vector(snippet: &str, vocab: Option<&Vocabulary>) -> Result<CountVec, LexError> {
    let seq = tokenize(snippet)?;
    let mut v = CountVec::new();
    for tok in seq.tokens {
        let key = match vocab {
            Some(voc) => voc.token(voc.index_or_unk(&tok.text)).to_string(),
            None => tok.text,
        };
        *v.entry(key).or_insert(0.0) += 1.0;
    }
    Ok(v)
}

fn sparse_cosine(a: &CountVec, b: &CountVec) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(k, x)| large.get(k).map(|y| x * y))
        .sum();
    let na = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Cosine similarity of the token-count vectors of two snippets. Tokens
/// outside `vocab` (when given) count as `<UNK>`.
pub fn snippet_similarity(a: &str, b: &str, vocab: Option<&Vocabulary>) -> Result<f64, LexError> {
    Ok(sparse_cosine(&count_vector(a, vocab)?, &count_vector(b, vocab)?))
}

#[derive(Clone, Debug, Default)]
pub struct DedupOutcome {
    pub kept: Vec<Sample>,
    pub removed: Vec<Sample>,
    pub faulty: Vec<(Sample, LexError)>,
}

/// Per question, scans answers in input order and drops any whose cosine
/// similarity to an already kept answer of the same question reaches
/// `sim_threshold`. The first answer is always kept. Unlexable snippets go
/// to `faulty`. Output preserves input order.
pub fn dedup_answers(samples: &[Sample], vocab: Option<&Vocabulary>, sim_threshold: f64) -> DedupOutcome {
    let vectors = crate::par::map(samples, |s| count_vector(&s.snippet, vocab));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of: HashMap<u64, usize> = HashMap::new();
    for (i, s) in samples.iter().enumerate() {
        if vectors[i].is_ok() {
            let g = *group_of.entry(s.question_id).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(i);
        }
    }

    let keep_flags: Vec<Vec<(usize, bool)>> = crate::par::map(&groups, |members| {
        let mut kept: Vec<&CountVec> = Vec::new();
        members
            .iter()
            .map(|&i| {
                let v = vectors[i].as_ref().expect("lexable");
                let dup = kept.iter().any(|k| sparse_cosine(k, v) >= sim_threshold);
                if !dup {
                    kept.push(v);
                }
                (i, !dup)
            })
            .collect()
    });
    let mut keep = vec![false; samples.len()];
    for (i, k) in keep_flags.into_iter().flatten() {
        keep[i] = k;
    }

    let mut out = DedupOutcome::default();
    for (i, s) in samples.iter().enumerate() {
        match &vectors[i] {
            Err(e) => out.faulty.push((s.clone(), *e)),
            Ok(_) if keep[i] => out.kept.push(s.clone()),
            Ok(_) => out.removed.push(s.clone()),
        }
    }
    out
}

#[derive(Clone, Debug, Default)]
pub struct MergeOutcome {
    pub merged: Vec<Sample>,
    pub overlap_removed: Vec<Sample>,
    pub faulty: Vec<(Sample, LexError)>,
}

/// Union of two individually curated sources. A second-source sample is a
/// duplicate when its question id already occurs in the first source, or
/// when its snippet reaches `sim_threshold` cosine similarity with a kept
/// snippet carrying the same intent text. Unlexable snippets from either
/// side are removed as faulty.
pub fn merge_sources(
    conala: &[Sample],
    staqc: &[Sample],
    vocab: Option<&Vocabulary>,
    sim_threshold: f64,
) -> MergeOutcome {
    let mut out = MergeOutcome::default();
    let mut by_intent: HashMap<String, Vec<CountVec>> = HashMap::new();
    let mut conala_qids = HashSet::new();

    let conala_vecs = crate::par::map(conala, |s| count_vector(&s.snippet, vocab));
    for (s, v) in conala.iter().zip(conala_vecs) {
        match v {
            Err(e) => out.faulty.push((s.clone(), e)),
            Ok(v) => {
                conala_qids.insert(s.question_id);
                by_intent.entry(s.intent.clone()).or_default().push(v);
                out.merged.push(s.clone());
            }
        }
    }

    let staqc_vecs = crate::par::map(staqc, |s| count_vector(&s.snippet, vocab));
    for (s, v) in staqc.iter().zip(staqc_vecs) {
        let v = match v {
            Err(e) => {
                out.faulty.push((s.clone(), e));
                continue;
            }
            Ok(v) => v,
        };
        let similar = by_intent
            .get(&s.intent)
            .is_some_and(|kept| kept.iter().any(|k| sparse_cosine(k, &v) >= sim_threshold));
        if conala_qids.contains(&s.question_id) || similar {
            out.overlap_removed.push(s.clone());
        } else {
            by_intent.entry(s.intent.clone()).or_default().push(v);
            out.merged.push(s.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Source;

    fn s(qid: u64, intent: &str, snippet: &str) -> Sample {
        Sample::new(qid, intent, snippet, Source::Curated)
    }

    #[test]
    fn identical_answers_collapse() {
        let out = dedup_answers(&[s(1, "a", "x = 1"), s(1, "a", "x = 1")], None, 0.5);
        assert_eq!(out.kept.len(), 1);
        assert_eq!(out.removed.len(), 1);
    }

    #[test]
    fn count_vector_cosine() {
        // counts a:1 b:2 c:3 vs a:4 b:5 c:6
        let a = "a b b c c c";
        let b = "a a a a b b b b b c c c c c c";
        let sim = snippet_similarity(a, b, None).unwrap();
        assert!((sim - 32.0 / (14.0f64 * 77.0).sqrt()).abs() < 1e-12);
        let out = dedup_answers(&[s(1, "q", a), s(1, "q", b)], None, 0.5);
        assert_eq!(out.kept.len(), 1);
        assert_eq!(snippet_similarity("x", "y", None).unwrap(), 0.0);
        let out = dedup_answers(&[s(1, "q", "x"), s(1, "q", "y")], None, 0.5);
        assert_eq!(out.kept.len(), 2);
        assert_eq!(snippet_similarity("", "y", None).unwrap(), 0.0);
    }

    #[test]
    fn groups_are_independent_and_faulty_split_out() {
        let out = dedup_answers(
            &[s(1, "a", "f(x)"), s(2, "b", "f(x)"), s(1, "a", "'open"), s(1, "a", "f(x)")],
            None,
            0.5,
        );
        assert_eq!(out.kept.iter().map(|s| s.question_id).collect::<Vec<_>>(), [1, 2]);
        assert_eq!(out.faulty.len(), 1);
        assert_eq!(out.removed.len(), 1);
    }

    #[test]
    fn merge_rules() {
        let conala: Vec<_> = (0..3).map(|i| s(i, &format!("c{i}"), &format!("f{i}()"))).collect();
        let staqc: Vec<_> = (10..14).map(|i| s(i, &format!("s{i}"), &format!("g{i}()"))).collect();
        let out = merge_sources(&conala, &staqc, None, 0.5);
        assert_eq!(out.merged.len(), 7);
        assert!(out.overlap_removed.is_empty());

        let out = merge_sources(&conala, &[s(1, "new", "zzz")], None, 0.5);
        assert_eq!(out.overlap_removed.len(), 1);

        let out = merge_sources(&conala, &[s(99, "c0", "f0 ( )")], None, 0.5);
        assert_eq!(out.overlap_removed.len(), 1);
        let out = merge_sources(&conala, &[s(99, "other", "f0 ( )")], None, 0.5);
        assert!(out.overlap_removed.is_empty());
    }
}
