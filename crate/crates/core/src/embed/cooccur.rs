use std::collections::HashMap;

use super::vocab::Vocabulary;

/// Sentences per counting shard. Fixed so that sums do not depend on the
/// thread count.
const SHARD: usize = 256;

/// Sparse symmetric matrix of distance-weighted co-occurrence counts,
/// stored as entries sorted by (row, col). Both (i, j) and (j, i) appear.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CooccurrenceMatrix {
    pub size: usize,
    pub entries: Vec<(u32, u32, f64)>,
}

impl CooccurrenceMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries
            .binary_search_by(|e| (e.0 as usize, e.1 as usize).cmp(&(i, j)))
            .map(|k| self.entries[k].2)
            .unwrap_or(0.0)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

type Counts = HashMap<(u32, u32), f64>;

/// Each ordered pair of positions at distance `1..=window` adds `1/distance`
/// to `X[t_i][t_j]`. Out-of-vocabulary tokens are dropped first.
pub fn build_cooccurrence<S: AsRef<str> + Sync>(
    corpus: &[Vec<S>],
    vocab: &Vocabulary,
    window: usize,
) -> CooccurrenceMatrix {
    let counts = crate::par::map_reduce_chunks(
        corpus,
        SHARD,
        Counts::new,
        |acc, sent| {
            let ids: Vec<u32> = sent
                .iter()
                .filter_map(|t| vocab.index_of(t.as_ref()).map(|i| i as u32))
                .collect();
            for (p, &a) in ids.iter().enumerate() {
                for (dist, &b) in ids[p + 1..].iter().take(window).enumerate() {
                    let x = 1.0 / (dist + 1) as f64;
                    *acc.entry((a, b)).or_insert(0.0) += x;
                    *acc.entry((b, a)).or_insert(0.0) += x;
                }
            }
        },
        |acc, part| {
            for (k, v) in part {
                *acc.entry(k).or_insert(0.0) += v;
            }
        },
    )
    .unwrap_or_default();
    let mut entries: Vec<(u32, u32, f64)> = counts.into_iter().map(|((i, j), x)| (i, j, x)).collect();
    entries.sort_unstable_by_key(|e| (e.0, e.1));
    CooccurrenceMatrix {
        size: vocab.len(),
        entries,
    }
}
