//! Ingestion and curation of (intent, snippet) samples.

mod clean;
mod curate;
mod dedup;
mod io;
mod negatives;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use clean::{clean_intent, clean_snippet};
pub use curate::{curate, CurationInputs, CurationOutput};
pub use dedup::{dedup_answers, merge_sources, snippet_similarity, DedupOutcome, MergeOutcome};
pub use io::{
    load_samples, read_jsonl, write_jsonl, write_report, InputFormat, LoadOutcome, Reject,
};
pub use negatives::{generate_negatives, label_pairs, NEGATIVE_RETRY_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Curated,
    Mined,
    Staqc,
    Synthetic,
}

/// One intent/snippet record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub question_id: u64,
    pub intent: String,
    pub snippet: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob: Option<f64>,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
    /// Question the snippet came from, when it differs from `question_id`
    /// (negative pairs only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snippet_question_id: Option<u64>,
}

impl Sample {
    pub fn new(question_id: u64, intent: impl Into<String>, snippet: impl Into<String>, source: Source) -> Self {
        Sample {
            question_id,
            intent: intent.into(),
            snippet: snippet.into(),
            prob: None,
            source,
            label: None,
            snippet_question_id: None,
        }
    }

    pub fn with_prob(mut self, prob: f64) -> Self {
        self.prob = Some(prob);
        self
    }

    pub fn with_label(mut self, label: u8) -> Self {
        self.label = Some(label);
        self
    }

    /// Question id of the snippet half of the pair.
    pub fn snippet_qid(&self) -> u64 {
        self.snippet_question_id.unwrap_or(self.question_id)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurationConfig {
    pub sim_threshold: f64,
    pub prob_threshold: f64,
    pub max_lines: usize,
    pub rng_seed: u64,
}

impl Default for CurationConfig {
    fn default() -> Self {
        CurationConfig {
            sim_threshold: 0.5,
            prob_threshold: 0.5,
            max_lines: 5,
            rng_seed: 0,
        }
    }
}

impl CurationConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for (name, v) in [("sim_threshold", self.sim_threshold), ("prob_threshold", self.prob_threshold)] {
            if !(0.0..=1.0).contains(&v) {
                errs.push(format!("curation.{name} = {v} out of [0,1]"));
            }
        }
        if self.max_lines < 1 {
            errs.push("curation.max_lines must be >= 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

/// Stage-by-stage sample counts. Every `*_removed`/`*_filtered` field counts
/// samples dropped at that stage.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurationReport {
    pub ingested: usize,
    pub load_rejected: usize,
    pub prob_filtered: usize,
    pub length_filtered: usize,
    pub faulty_removed: usize,
    pub dedup_removed: usize,
    pub overlap_removed: usize,
    pub conala_positives: usize,
    pub staqc_positives: usize,
    pub positives: usize,
    pub negatives: usize,
    pub total: usize,
}

impl CurationReport {
    /// Samples remaining after each filtering stage, starting at `ingested`.
    pub fn stage_remaining(&self) -> Vec<(&'static str, i64)> {
        let mut left = self.ingested as i64;
        let mut out = vec![("ingested", left)];
        for (name, removed) in [
            ("prob_filter", self.prob_filtered),
            ("length_filter", self.length_filtered),
            ("faulty", self.faulty_removed),
            ("dedup", self.dedup_removed),
            ("overlap", self.overlap_removed),
        ] {
            left -= removed as i64;
            out.push((name, left));
        }
        out
    }

    /// Checks the bookkeeping identities; returns the first violation.
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.positives + self.negatives != self.total {
            return Err("positives + negatives != total".into());
        }
        let stages = self.stage_remaining();
        if stages.iter().any(|(_, n)| *n < 0) {
            return Err(format!("negative stage count: {stages:?}"));
        }
        if stages.last().map(|s| s.1) != Some(self.positives as i64) {
            return Err(format!(
                "stages end at {:?} but positives = {}",
                stages.last(),
                self.positives
            ));
        }
        if self.conala_positives + self.staqc_positives != self.positives {
            return Err("per-source positives do not sum".into());
        }
        if self.negatives > self.positives {
            return Err("more negatives than positives".into());
        }
        Ok(())
    }
}

/// Keeps exactly the samples with `prob >= prob_threshold`, in order.
pub fn filter_mined(samples: &[Sample], prob_threshold: f64) -> Result<Vec<Sample>> {
    let mut out = Vec::with_capacity(samples.len());
    for s in samples {
        let p = s.prob.ok_or_else(|| {
            Error::Contract(format!(
                "mined sample question_id={} intent={:?} has no prob",
                s.question_id, s.intent
            ))
        })?;
        if p >= prob_threshold {
            out.push(s.clone());
        }
    }
    Ok(out)
}
