use super::dedup::{dedup_answers, merge_sources};
use super::io::Reject;
use super::negatives::label_pairs;
use super::{clean_intent, clean_snippet, filter_mined, CurationConfig, CurationReport, Sample, Source};
use crate::Result;

/// Already-loaded raw inputs for one curation run.
#[derive(Clone, Debug, Default)]
pub struct CurationInputs {
    pub conala_curated: Vec<Sample>,
    pub conala_mined: Vec<Sample>,
    pub staqc: Vec<Sample>,
    /// Records rejected while loading, carried into the rejects stream.
    pub load_rejects: Vec<Reject>,
}

#[derive(Clone, Debug)]
pub struct CurationOutput {
    /// Positives (label 1) followed by negatives (label 0).
    pub samples: Vec<Sample>,
    pub rejects: Vec<Reject>,
    pub report: CurationReport,
}

/// Full curation: probability filter on mined records, cleaning, line cap,
/// lexability check, per-question dedup within each source, cross-source
/// merge, and negative generation.
pub fn curate(inputs: CurationInputs, cfg: &CurationConfig) -> Result<CurationOutput> {
    cfg.validate()?;
    let mut report = CurationReport {
        ingested: inputs.conala_curated.len() + inputs.conala_mined.len() + inputs.staqc.len(),
        load_rejected: inputs.load_rejects.len(),
        ..Default::default()
    };
    let mut rejects = inputs.load_rejects;

    let mined_kept = filter_mined(&inputs.conala_mined, cfg.prob_threshold)?;
    for s in &inputs.conala_mined {
        if s.prob.is_some_and(|p| p < cfg.prob_threshold) {
            rejects.push(Reject::for_sample("prob_filter", "below probability threshold", s));
        }
    }
    report.prob_filtered = inputs.conala_mined.len() - mined_kept.len();

    let mut conala = inputs.conala_curated;
    conala.extend(mined_kept);

    let stage = |samples: Vec<Sample>, report: &mut CurationReport, rejects: &mut Vec<Reject>| {
        let cleaned = crate::par::map(&samples, |s| {
            let mut s = s.clone();
            s.intent = clean_intent(&s.intent);
            s.snippet = clean_snippet(&s.snippet);
            s
        });
        let mut kept = Vec::with_capacity(cleaned.len());
        for s in cleaned {
            if s.intent.is_empty() || s.snippet.is_empty() {
                report.faulty_removed += 1;
                rejects.push(Reject::for_sample("clean", "empty after cleaning", &s));
            } else if s.snippet.lines().count() > cfg.max_lines {
                report.length_filtered += 1;
                rejects.push(Reject::for_sample("length_filter", "too many lines", &s));
            } else {
                kept.push(s);
            }
        }
        let out = dedup_answers(&kept, None, cfg.sim_threshold);
        report.faulty_removed += out.faulty.len();
        for (s, e) in &out.faulty {
            rejects.push(Reject::for_sample("lex", format!("unlexable: {e}"), s));
        }
        report.dedup_removed += out.removed.len();
        for s in &out.removed {
            rejects.push(Reject::for_sample("dedup", "similar answer for same question", s));
        }
        out.kept
    };
    let conala = stage(conala, &mut report, &mut rejects);
    let staqc = stage(inputs.staqc, &mut report, &mut rejects);

    let merged = merge_sources(&conala, &staqc, None, cfg.sim_threshold);
    report.faulty_removed += merged.faulty.len();
    for (s, e) in &merged.faulty {
        rejects.push(Reject::for_sample("lex", format!("unlexable: {e}"), s));
    }
    report.overlap_removed = merged.overlap_removed.len();
    for s in &merged.overlap_removed {
        rejects.push(Reject::for_sample("merge", "overlaps first source", s));
    }

    let positives = merged.merged;
    report.staqc_positives = positives.iter().filter(|s| s.source == Source::Staqc).count();
    report.conala_positives = positives.len() - report.staqc_positives;
    let samples = label_pairs(&positives, cfg.rng_seed)?;
    report.positives = positives.len();
    report.negatives = samples.len() - positives.len();
    report.total = samples.len();
    Ok(CurationOutput {
        samples,
        rejects,
        report,
    })
}
