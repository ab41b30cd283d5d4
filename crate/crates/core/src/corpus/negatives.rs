use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Sample, Source};
use crate::{Error, Result};

/// Draws per positive before giving up on finding a foreign snippet.
pub const NEGATIVE_RETRY_BUDGET: usize = 100;

/// Pairs each positive's intent with a snippet drawn uniformly from the
/// whole set that belongs to a different question. At most one negative per
/// positive; a positive whose budget runs out gets none.
pub fn generate_negatives(positives: &[Sample], rng_seed: u64) -> Result<Vec<Sample>> {
    let distinct: HashSet<u64> = positives.iter().map(|s| s.question_id).collect();
    if distinct.len() < 2 {
        return Err(Error::InvalidArgument("no valid negative source".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = positives.len();
    let mut out = Vec::with_capacity(n);
    for p in positives {
        for _ in 0..NEGATIVE_RETRY_BUDGET {
            let other = &positives[rng.gen_range(0..n)];
            if other.question_id != p.question_id {
                out.push(Sample {
                    question_id: p.question_id,
                    intent: p.intent.clone(),
                    snippet: other.snippet.clone(),
                    prob: None,
                    source: Source::Synthetic,
                    label: Some(0),
                    snippet_question_id: Some(other.question_id),
                });
                break;
            }
        }
    }
    Ok(out)
}

/// Positives relabelled 1 followed by their generated negatives.
pub fn label_pairs(positives: &[Sample], rng_seed: u64) -> Result<Vec<Sample>> {
    let negatives = generate_negatives(positives, rng_seed)?;
    let mut out: Vec<Sample> = positives.iter().cloned().map(|s| s.with_label(1)).collect();
    out.extend(negatives);
    Ok(out)
}
