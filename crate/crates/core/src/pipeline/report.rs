//! Summary tables shaped after the usual corpus / vocabulary / model
//! result tables, written as Markdown and CSV.

use std::collections::BTreeMap;

use super::manifest::StageRun;
use super::stages::{EmbedSummary, RunContext, Seq2SeqReport};
use crate::corpus::CurationReport;
use crate::evalkit::{bar_chart_svg, MetricsReport};
use crate::Result;

/// A header row plus data rows of preformatted cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(title: &str, header: &[&str]) -> Self {
        Table {
            title: title.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push<S: ToString>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(|c| c.to_string()).collect());
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("## {}\n\n| {} |\n", self.title, self.header.join(" | "));
        s.push_str(&format!("|{}\n", "---|".repeat(self.header.len())));
        for r in &self.rows {
            s.push_str(&format!("| {} |\n", r.join(" | ")));
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let line = |cells: &[String]| cells.iter().map(|c| crate::embed::csv_field(c)).collect::<Vec<_>>().join(",");
        let mut s = line(&self.header);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&line(r));
            s.push('\n');
        }
        s
    }
}

pub fn curation_table(r: &CurationReport) -> Table {
    let mut t = Table::new("Corpus curation", &["stage", "removed", "remaining"]);
    t.push(["load_rejected".to_string(), r.load_rejected.to_string(), String::new()]);
    let removed = [
        0,
        r.prob_filtered,
        r.length_filtered,
        r.faulty_removed,
        r.dedup_removed,
        r.overlap_removed,
    ];
    for (k, ((name, left), gone)) in r.stage_remaining().into_iter().zip(removed).enumerate() {
        let gone = if k == 0 { String::new() } else { gone.to_string() };
        t.push([name.to_string(), gone, left.to_string()]);
    }
    t.push(["positives".to_string(), String::new(), r.positives.to_string()]);
    t.push(["negatives".to_string(), String::new(), r.negatives.to_string()]);
    t.push(["total".to_string(), String::new(), r.total.to_string()]);
    t
}

pub fn vocab_table(rows: &[EmbedSummary]) -> Table {
    let mut t = Table::new(
        "Embedding vocabularies",
        &["embedding", "algorithm", "corpus", "window", "min_count", "epochs", "vocab size"],
    );
    for e in rows {
        t.push([
            e.name.clone(),
            e.algorithm.as_str().to_string(),
            e.corpus.as_str().to_string(),
            e.window.to_string(),
            e.min_count.to_string(),
            e.epochs.to_string(),
            e.vocab_size.to_string(),
        ]);
    }
    t
}

/// Side-by-side `token (count)` columns, one per embedding.
pub fn frequency_table(columns: &[(String, Vec<(String, u64)>)]) -> Table {
    let mut header = vec!["rank"];
    header.extend(columns.iter().map(|c| c.0.as_str()));
    let mut t = Table::new("Most frequent tokens", &header);
    let n = columns.iter().map(|c| c.1.len()).max().unwrap_or(0);
    for i in 0..n {
        let mut row = vec![(i + 1).to_string()];
        for (_, col) in columns {
            row.push(col.get(i).map_or(String::new(), |(tok, c)| format!("{tok} ({c})")));
        }
        t.push(row);
    }
    t
}

pub fn seq2seq_table(r: &Seq2SeqReport) -> Table {
    let mut t = Table::new(
        "Seq2seq model",
        &["split", "pairs", "loss", "token accuracy (%)", "exact match (%)"],
    );
    for (name, e) in [("train", Some(&r.train)), ("test", r.test.as_ref())] {
        if let Some(e) = e {
            t.push([
                name.to_string(),
                e.n.to_string(),
                format!("{:.4}", e.loss),
                format!("{:.2}", 100.0 * e.token_accuracy),
                format!("{:.2}", 100.0 * e.exact_match),
            ]);
        }
    }
    t
}

pub fn classifier_table(metrics: &[(String, MetricsReport)]) -> Table {
    let mut t = Table::new(
        "Binary classifier",
        &["model", "Loss", "Accuracy (%)", "AUC ROC", "AUC PR", "F1"],
    );
    for (name, m) in metrics {
        t.push([
            name.clone(),
            format!("{:.2}", m.loss),
            format!("{:.2}", 100.0 * m.accuracy),
            format!("{:.2}", m.auc_roc),
            format!("{:.2}", m.auc_pr),
            format!("{:.2}", m.f1),
        ]);
    }
    t
}

fn read_json<T: serde::de::DeserializeOwned>(run: &mut StageRun, stage: &str, name: &str) -> Result<T> {
    let path = run.prior(stage, name)?;
    let text = std::fs::read_to_string(&path).map_err(|e| crate::Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn read_freq(run: &mut StageRun, name: &str) -> Result<Vec<(String, u64)>> {
    let path = run.prior("embed", &format!("{name}.freq.csv"))?;
    let text = std::fs::read_to_string(&path).map_err(|e| crate::Error::io(&path, e))?;
    // token may be quoted and contain commas; the count never does.
    Ok(text
        .lines()
        .skip(1)
        .filter_map(|l| {
            let (tok, c) = l.rsplit_once(',')?;
            let tok = tok
                .strip_prefix('"')
                .and_then(|t| t.strip_suffix('"'))
                .map_or(tok.to_string(), |t| t.replace("\"\"", "\""));
            Some((tok, c.parse().ok()?))
        })
        .collect())
}

pub(super) fn report_stage(ctx: &RunContext, run: &mut StageRun) -> Result<()> {
    let curation: CurationReport = read_json(run, "curate", "curation_report.json")?;
    let embeds: Vec<EmbedSummary> = read_json(run, "embed", "embed_summary.json")?;
    let s2s: Seq2SeqReport = read_json(run, "train-seq2seq", "eval.json")?;
    let raw: BTreeMap<String, MetricsReport> = read_json(run, "evaluate", "metrics.json")?;
    let metrics: Vec<(String, MetricsReport)> = ctx
        .config
        .features
        .variants
        .iter()
        .filter_map(|v| raw.get(v.cli_name()).map(|m| (v.cli_name().to_string(), m.clone())))
        .collect();
    let mut freq = Vec::new();
    for p in &ctx.config.embed.code {
        freq.push((p.name.clone(), read_freq(run, &p.name)?));
    }

    let tables = [
        ("table1_curation", curation_table(&curation)),
        ("table2_vocab", vocab_table(&embeds)),
        ("table3_frequency", frequency_table(&freq)),
        ("table4_seq2seq", seq2seq_table(&s2s)),
        ("table5_classifier", classifier_table(&metrics)),
    ];
    let mut md = String::from("# Run report\n\n");
    for (stem, t) in &tables {
        run.write(&format!("{stem}.csv"), t.to_csv())?;
        md.push_str(&t.to_markdown());
        md.push('\n');
    }
    run.write("report.md", md)?;
    let acc: Vec<(String, f64)> = metrics.iter().map(|(n, m)| (n.clone(), 100.0 * m.accuracy)).collect();
    run.write("classifier_accuracy.svg", bar_chart_svg("Classifier accuracy", "accuracy (%)", &acc))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::Confusion;

    #[test]
    fn classifier_grid_has_the_five_columns() {
        let m = MetricsReport {
            loss: 0.6931,
            accuracy: 0.516,
            f1: 0.68,
            auc_roc: 0.5,
            auc_pr: 0.515,
            confusion: Confusion {
                tp: 515,
                fp: 485,
                tn: 0,
                fn_: 0,
            },
            n: 1000,
            threshold: 0.5,
        };
        let t = classifier_table(&[("hidden".into(), m)]);
        assert_eq!(t.header[1..], ["Loss", "Accuracy (%)", "AUC ROC", "AUC PR", "F1"]);
        assert_eq!(t.rows[0], ["hidden", "0.69", "51.60", "0.50", "0.52", "0.68"]);
        assert!(t.to_markdown().contains("| hidden | 0.69 | 51.60 |"));
    }

    #[test]
    fn curation_rows_close() {
        let r = CurationReport {
            ingested: 10,
            dedup_removed: 2,
            positives: 8,
            conala_positives: 8,
            negatives: 8,
            total: 16,
            ..Default::default()
        };
        let t = curation_table(&r);
        assert_eq!(t.rows.last().unwrap(), &["total", "", "16"]);
        assert!(t.rows.iter().any(|row| row == &["dedup", "2", "8"]));
    }

    #[test]
    fn csv_quotes_cells() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(["1,2", "q\"q"]);
        assert_eq!(t.to_csv(), "a,b\n\"1,2\",\"q\"\"q\"\n");
    }
}
