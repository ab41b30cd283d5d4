use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{PipelineConfig, SplitConfig};
use super::manifest::{RunManifest, StageRun};
use super::report;
use super::seed::derive_seed;
use crate::apiminer::{build_whitelist, default_stopwords, extract_imports_from_paths, mine_intent_apis, FrequencyTable};
use crate::classifier::{build_features, predict, train_classifier, FeatureInputs, Variant};
use crate::codelex::{lex_and_normalize, ApiWhitelist};
use crate::corpus::{
    curate, load_samples, read_jsonl, write_jsonl, CurationConfig, CurationInputs, InputFormat, Reject, Sample, Source,
};
use crate::embed::{
    build_cooccurrence, frequency_csv, pca_project, projection_csv, train_glove, train_skipgram, Algorithm, CorpusTag,
    EmbedPreset, EmbeddingTable, Vocabulary, NUM_SPECIALS,
};
use crate::evalkit::{bar_chart_svg, line_plot_svg, pr_auc, roc_auc, scatter_svg, MetricsReport, Series};
use crate::numkit::{read_checkpoint, write_checkpoint};
use crate::seq2seq::{evaluate, train, vectorize, PairTokens, Seq2SeqEval, Seq2SeqModel, Seq2SeqVocabs};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Curate,
    MineApis,
    Lex,
    Embed,
    TrainSeq2seq,
    TrainClassifier,
    Evaluate,
    Report,
}

impl Stage {
    /// Execution order of a full run.
    pub const ALL: [Stage; 8] = [
        Stage::Curate,
        Stage::MineApis,
        Stage::Lex,
        Stage::Embed,
        Stage::TrainSeq2seq,
        Stage::TrainClassifier,
        Stage::Evaluate,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Curate => "curate",
            Stage::MineApis => "mine-apis",
            Stage::Lex => "lex",
            Stage::Embed => "embed",
            Stage::TrainSeq2seq => "train-seq2seq",
            Stage::TrainClassifier => "train-classifier",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }

    /// Stages that draw random numbers and so need a seed.
    pub fn randomized(self) -> bool {
        matches!(
            self,
            Stage::Curate | Stage::Lex | Stage::Embed | Stage::TrainSeq2seq | Stage::TrainClassifier
        )
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown stage {s:?}")))
    }
}

#[derive(Debug, thiserror::Error)]
#[error("stage {stage} failed: {error}")]
pub struct StageFailure {
    pub stage: Stage,
    #[source]
    pub error: Error,
}

/// Everything a stage needs besides files from earlier stages.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub config: PipelineConfig,
    pub out: PathBuf,
    /// Global seed; `None` only when no seed was given and the run is not
    /// nondeterministic, in which case randomized stages refuse to run.
    pub seed: Option<u64>,
    pub nondeterministic: bool,
}

impl RunContext {
    /// `seed` overrides the config's seed. Without either, a
    /// nondeterministic run draws one from the OS.
    pub fn new(config: PipelineConfig, out: impl Into<PathBuf>, seed: Option<u64>, nondeterministic: bool) -> Self {
        let seed = seed
            .or(config.seed)
            .or_else(|| nondeterministic.then(rand::random::<u64>));
        RunContext {
            config,
            out: out.into(),
            seed,
            nondeterministic,
        }
    }

    fn begin(&self, stage: Stage) -> Result<(StageRun, u64)> {
        let stage_seed = if stage.randomized() {
            let s = self.seed.ok_or_else(|| {
                Error::Contract(format!(
                    "stage {stage} is randomized; pass --seed N or --nondeterministic"
                ))
            })?;
            Some(derive_seed(s, stage.name()))
        } else {
            None
        };
        let mut run = StageRun::begin(
            &self.out,
            stage.name(),
            self.seed,
            stage_seed,
            self.nondeterministic,
            serde_json::to_value(&self.config)?,
        )?;
        run.write("config.toml", self.config.to_toml()?)?;
        Ok((run, stage_seed.unwrap_or(0)))
    }
}

/// Runs one stage and writes its manifest.
pub fn run_stage(ctx: &RunContext, stage: Stage) -> std::result::Result<RunManifest, StageFailure> {
    let go = || -> Result<RunManifest> {
        let (mut run, seed) = ctx.begin(stage)?;
        log::info!("stage {stage} starting");
        match stage {
            Stage::Curate => curate_stage(ctx, &mut run, seed)?,
            Stage::MineApis => mine_apis_stage(ctx, &mut run)?,
            Stage::Lex => lex_stage(ctx, &mut run, seed)?,
            Stage::Embed => embed_stage(ctx, &mut run, seed)?,
            Stage::TrainSeq2seq => seq2seq_stage(ctx, &mut run, seed)?,
            Stage::TrainClassifier => classifier_stage(ctx, &mut run, seed)?,
            Stage::Evaluate => evaluate_stage(ctx, &mut run)?,
            Stage::Report => report::report_stage(ctx, &mut run)?,
        }
        let m = run.finish()?;
        log::info!("stage {stage} done in {} ms", m.duration_ms);
        Ok(m)
    };
    go().map_err(|error| StageFailure { stage, error })
}

/// Runs every stage in order, stopping at the first failure.
pub fn run_all(ctx: &RunContext) -> std::result::Result<Vec<RunManifest>, StageFailure> {
    Stage::ALL.into_iter().map(|s| run_stage(ctx, s)).collect()
}

/// A curated sample with its intent words and normalized code tokens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LexedSample {
    #[serde(flatten)]
    pub sample: Sample,
    pub intent_tokens: Vec<String>,
    pub code_tokens: Vec<String>,
}

impl LexedSample {
    pub fn is_positive(&self) -> bool {
        self.sample.label == Some(1)
    }

    pub fn pair(&self) -> PairTokens {
        PairTokens {
            intent: self.intent_tokens.clone(),
            code: self.code_tokens.clone(),
        }
    }
}

/// Per-embedding summary row (vocabulary size and final objective).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedSummary {
    pub name: String,
    pub algorithm: Algorithm,
    pub corpus: CorpusTag,
    pub window: usize,
    pub min_count: u64,
    pub epochs: usize,
    pub dim: usize,
    pub vocab_size: usize,
    pub final_loss: Option<f64>,
    pub pca_ratios: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seq2SeqReport {
    pub epochs_run: usize,
    pub train: Seq2SeqEval,
    pub test: Option<Seq2SeqEval>,
}

/// Held-out test indices with `round(test_positive_share · n_test)`
/// positives, drawn per class after a seeded shuffle. Returns (train, test),
/// both ascending.
pub fn test_split(labels: &[bool], cfg: &SplitConfig, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let n_test = (cfg.test_fraction * labels.len() as f64).round() as usize;
    let tp = ((cfg.test_positive_share * n_test as f64).round() as usize).min(pos.len());
    let tn = (n_test - tp).min(neg.len());
    let mut test: Vec<usize> = pos[..tp].iter().chain(&neg[..tn]).copied().collect();
    let mut train: Vec<usize> = pos[tp..].iter().chain(&neg[tn..]).copied().collect();
    test.sort_unstable();
    train.sort_unstable();
    (train, test)
}

/// `*.py` files under `dir`, sorted, recursing into subdirectories.
pub fn python_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let entries = std::fs::read_dir(&d).map_err(|e| Error::io(&d, e))?;
        for e in entries {
            let p = e.map_err(|e| Error::io(&d, e))?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "py") {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn curate_stage(ctx: &RunContext, run: &mut StageRun, seed: u64) -> Result<()> {
    let inp = &ctx.config.inputs;
    let format: InputFormat = inp.format.parse()?;
    let mut inputs = CurationInputs::default();
    let mut any = false;
    for (path, source) in [
        (&inp.conala_curated, Source::Curated),
        (&inp.conala_mined, Source::Mined),
        (&inp.staqc, Source::Staqc),
    ] {
        let Some(path) = path else { continue };
        any = true;
        run.external(path)?;
        let loaded = load_samples(path, format, source)?;
        let slot = match source {
            Source::Curated => &mut inputs.conala_curated,
            Source::Mined => &mut inputs.conala_mined,
            _ => &mut inputs.staqc,
        };
        slot.extend(loaded.samples);
        inputs.load_rejects.extend(loaded.rejects);
    }
    if !any {
        return Err(Error::InvalidArgument("no input corpus configured under [inputs]".into()));
    }
    let cfg = CurationConfig {
        rng_seed: seed,
        ..ctx.config.curation.clone()
    };
    let out = curate(inputs, &cfg)?;
    out.report.check().map_err(Error::Contract)?;
    write_jsonl(&run.path("curated.jsonl"), &out.samples)?;
    run.record("curated.jsonl")?;
    write_jsonl(&run.path("rejects.jsonl"), &out.rejects)?;
    run.record("rejects.jsonl")?;
    run.write_json("curation_report.json", &out.report)?;
    Ok(())
}

fn bars(t: &FrequencyTable) -> Vec<(String, f64)> {
    t.entries().iter().map(|(n, c)| (n.clone(), *c as f64)).collect()
}

fn mine_apis_stage(ctx: &RunContext, run: &mut StageRun) -> Result<()> {
    let cfg = &ctx.config;
    let samples: Vec<Sample> = read_jsonl(&run.prior("curate", "curated.jsonl")?)?;
    let intents: Vec<&str> = samples
        .iter()
        .filter(|s| s.label == Some(1))
        .map(|s| s.intent.as_str())
        .collect();
    let mut stop = default_stopwords();
    stop.extend(cfg.apiminer.extra_stopwords.iter().cloned());
    let k = cfg.apiminer.top_k;
    let intent_table = mine_intent_apis(&intents, &stop, k);

    let files = match &cfg.inputs.dev_dir {
        Some(d) => python_files(d)?,
        None => {
            log::warn!("no inputs.dev_dir; the import route contributes nothing");
            Vec::new()
        }
    };
    for f in &files {
        run.external(f)?;
    }
    let scan = extract_imports_from_paths(&files, k);
    for p in &scan.skipped {
        log::warn!("skipped unreadable source {}", p.display());
    }
    let member_db = match &cfg.inputs.member_db {
        Some(p) => {
            run.external(p)?;
            ApiWhitelist::load(p)?.member_db().clone()
        }
        None => Default::default(),
    };
    let wl = build_whitelist(&intent_table, &scan.table, &member_db, k);
    run.write("intent_apis.csv", intent_table.to_csv())?;
    run.write("import_apis.csv", scan.table.to_csv())?;
    run.write("whitelist.txt", wl.render())?;
    run.write("intent_apis.svg", bar_chart_svg("API names in intents", "count", &bars(&intent_table)))?;
    run.write("import_apis.svg", bar_chart_svg("Imported modules", "count", &bars(&scan.table)))?;
    Ok(())
}

/// One token list per lexable non-empty line of each development source.
fn dev_corpus(files: &[PathBuf], wl: &ApiWhitelist) -> Result<Vec<Vec<String>>> {
    let mut out = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(f).map_err(|e| Error::io(f, e))?;
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        for toks in crate::par::map(&lines, |l| lex_and_normalize(l.trim(), wl).ok()).into_iter().flatten() {
            if !toks.is_empty() {
                out.push(toks.into_texts());
            }
        }
    }
    Ok(out)
}

fn lex_stage(ctx: &RunContext, run: &mut StageRun, seed: u64) -> Result<()> {
    let samples: Vec<Sample> = read_jsonl(&run.prior("curate", "curated.jsonl")?)?;
    let wl = ApiWhitelist::load(&run.prior("mine-apis", "whitelist.txt")?)?;
    let lexed = crate::par::map(&samples, |s| lex_and_normalize(&s.snippet, &wl));
    let mut kept = Vec::with_capacity(samples.len());
    let mut dumps = Vec::with_capacity(samples.len());
    let mut rejects = Vec::new();
    for (s, r) in samples.into_iter().zip(lexed) {
        match r {
            Ok(seq) => {
                dumps.push(serde_json::json!({
                    "question_id": s.question_id,
                    "label": s.label,
                    "tokens": seq.tokens,
                }));
                kept.push(LexedSample {
                    intent_tokens: s.intent.split_whitespace().map(String::from).collect(),
                    code_tokens: seq.into_texts(),
                    sample: s,
                });
            }
            Err(e) => rejects.push(Reject::for_sample("lex", e.to_string(), &s)),
        }
    }
    let labels: Vec<bool> = kept.iter().map(LexedSample::is_positive).collect();
    let (tr, te) = test_split(&labels, &ctx.config.split, seed);
    let train: Vec<&LexedSample> = tr.iter().map(|&i| &kept[i]).collect();
    let test: Vec<&LexedSample> = te.iter().map(|&i| &kept[i]).collect();

    let files = match &ctx.config.inputs.dev_dir {
        Some(d) => python_files(d)?,
        None => Vec::new(),
    };
    for f in &files {
        run.external(f)?;
    }
    let dev = dev_corpus(&files, &wl)?;

    write_jsonl(&run.path("tokens.jsonl"), &dumps)?;
    run.record("tokens.jsonl")?;
    write_jsonl(&run.path("train.jsonl"), &train)?;
    run.record("train.jsonl")?;
    write_jsonl(&run.path("test.jsonl"), &test)?;
    run.record("test.jsonl")?;
    write_jsonl(&run.path("dev_tokens.jsonl"), &dev)?;
    run.record("dev_tokens.jsonl")?;
    write_jsonl(&run.path("lex_rejects.jsonl"), &rejects)?;
    run.record("lex_rejects.jsonl")?;
    let count = |v: &[&LexedSample]| v.iter().filter(|s| s.is_positive()).count();
    run.write_json(
        "split.json",
        &serde_json::json!({
            "train": train.len(),
            "train_positives": count(&train),
            "test": test.len(),
            "test_positives": count(&test),
            "dev_lines": dev.len(),
            "rejected": rejects.len(),
        }),
    )?;
    Ok(())
}

fn table_file(name: &str) -> String {
    format!("{name}.emb")
}

/// Loads an embedding table (and its sidecar) written by the embed stage.
fn load_table(run: &mut StageRun, name: &str) -> Result<EmbeddingTable> {
    let file = table_file(name);
    let path = run.prior("embed", &file)?;
    run.prior("embed", &format!("{file}.meta.json"))?;
    EmbeddingTable::load(&path)
}

fn epoch_csv(header: &str, values: &[f64]) -> String {
    let mut s = format!("epoch,{header}\n");
    for (i, v) in values.iter().enumerate() {
        s.push_str(&format!("{},{v}\n", i + 1));
    }
    s
}

fn train_preset(
    ctx: &RunContext,
    run: &mut StageRun,
    p: &EmbedPreset,
    corpus: &[Vec<String>],
    seed: u64,
) -> Result<EmbedSummary> {
    let ec = &ctx.config.embed;
    let vocab = Vocabulary::build(corpus, p.min_count, usize::MAX);
    let tag = p.corpus.as_str();
    let (table, losses, label) = match p.algorithm {
        Algorithm::W2v => {
            let out = train_skipgram(corpus, &vocab, &ec.skipgram(p, seed), tag, p.min_count)?;
            (out.table, out.epoch_loss, "loss")
        }
        Algorithm::Glove => {
            let x = build_cooccurrence(corpus, &vocab, p.window);
            let out = train_glove(&x, &vocab, &ec.glove(p, seed), tag, p.window, p.min_count)?;
            (out.table, out.epoch_cost, "cost")
        }
    };
    let file = table_file(&p.name);
    table.save(&run.path(&file))?;
    run.record(&file)?;
    run.record(&format!("{file}.meta.json"))?;
    run.write(&format!("{}.freq.csv", p.name), frequency_csv(&vocab, ctx.config.report.frequency_rows))?;
    run.write(&format!("{}.loss.csv", p.name), epoch_csv(label, &losses))?;
    let curve: Vec<(f64, f64)> = losses.iter().enumerate().map(|(i, &l)| ((i + 1) as f64, l)).collect();
    run.write(
        &format!("{}.loss.svg", p.name),
        line_plot_svg(&format!("{} training {label}", p.name), "epoch", label, &[Series::new(label, curve)]),
    )?;

    let proj = pca_project(&table, 2)?;
    let rows: Vec<usize> = (NUM_SPECIALS..table.len().min(NUM_SPECIALS + ctx.config.report.pca_tokens)).collect();
    run.write(&format!("{}.pca.csv", p.name), projection_csv(&table, &proj, &rows))?;
    let pts: Vec<(String, f64, f64)> = rows
        .iter()
        .map(|&i| {
            let r = proj.points.row(i);
            (table.vocab.token(i).to_string(), r[0], r.get(1).copied().unwrap_or(0.0))
        })
        .collect();
    run.write(
        &format!("{}.pca.svg", p.name),
        scatter_svg(&format!("{} PCA", p.name), &pts, pts.len()),
    )?;
    Ok(EmbedSummary {
        name: p.name.clone(),
        algorithm: p.algorithm,
        corpus: p.corpus,
        window: p.window,
        min_count: p.min_count,
        epochs: p.epochs,
        dim: p.dim,
        vocab_size: vocab.len(),
        final_loss: losses.last().copied(),
        pca_ratios: proj.ratios,
    })
}

fn embed_stage(ctx: &RunContext, run: &mut StageRun, seed: u64) -> Result<()> {
    let train: Vec<LexedSample> = read_jsonl(&run.prior("lex", "train.jsonl")?)?;
    let dev: Vec<Vec<String>> = read_jsonl(&run.prior("lex", "dev_tokens.jsonl")?)?;
    let pos: Vec<&LexedSample> = train.iter().filter(|s| s.is_positive()).collect();
    let intents: Vec<Vec<String>> = pos.iter().map(|s| s.intent_tokens.clone()).collect();
    let current: Vec<Vec<String>> = pos.iter().map(|s| s.code_tokens.clone()).collect();
    let current_dev: Vec<Vec<String>> = current.iter().chain(&dev).cloned().collect();

    let mut summary = Vec::new();
    let presets: Vec<EmbedPreset> = ctx.config.embed.presets().cloned().collect();
    for p in &presets {
        let corpus = match p.corpus {
            CorpusTag::Intent => &intents,
            CorpusTag::Current => &current,
            CorpusTag::CurrentDev => &current_dev,
        };
        log::info!("embedding {} over {} sentences", p.name, corpus.len());
        summary.push(train_preset(ctx, run, p, corpus, derive_seed(seed, &p.name))?);
    }
    run.write_json("embed_summary.json", &summary)?;
    Ok(())
}

fn history_files(run: &mut StageRun, stem: &str, h: &crate::evalkit::TrainingHistory, acc: &str) -> Result<()> {
    run.write(&format!("{stem}history.csv"), h.to_csv_labeled(acc))?;
    run.write(&format!("{stem}loss.svg"), h.loss_svg(&format!("{stem}loss")))?;
    run.write(&format!("{stem}accuracy.svg"), h.accuracy_svg(&format!("{stem}{acc}")))?;
    Ok(())
}

fn seq2seq_stage(ctx: &RunContext, run: &mut StageRun, seed: u64) -> Result<()> {
    let cfg = &ctx.config.seq2seq;
    let train_s: Vec<LexedSample> = read_jsonl(&run.prior("lex", "train.jsonl")?)?;
    let test_s: Vec<LexedSample> = read_jsonl(&run.prior("lex", "test.jsonl")?)?;
    let intent_table = load_table(run, &ctx.config.embed.intent.name)?;
    let code_name = &ctx.config.features.seq2seq_code_table;
    let code_table = if code_name.is_empty() {
        None
    } else {
        Some(load_table(run, code_name)?)
    };
    let pairs: Vec<PairTokens> = train_s.iter().filter(|s| s.is_positive()).map(LexedSample::pair).collect();
    let held: Vec<PairTokens> = test_s.iter().filter(|s| s.is_positive()).map(LexedSample::pair).collect();
    let vocabs = Seq2SeqVocabs::build(&pairs, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "init"));
    let model = Seq2SeqModel::new(cfg, vocabs, Some(&intent_table), code_table.as_ref(), &mut rng);
    let ex: Vec<_> = pairs.iter().map(|p| vectorize(p, cfg, &model.vocabs)).collect();
    let vex: Vec<_> = held.iter().map(|p| vectorize(p, cfg, &model.vocabs)).collect();
    let val = (!vex.is_empty()).then_some(vex.as_slice());
    let out = train(model, &ex, val, cfg, derive_seed(seed, "batches"))?;

    write_checkpoint(&run.path("seq2seq.snf"), &out.model.to_checkpoint()?)?;
    run.record("seq2seq.snf")?;
    history_files(run, "", &out.history, "token_accuracy")?;
    let rep = Seq2SeqReport {
        epochs_run: out.epochs_run,
        train: evaluate(&out.model, &ex, cfg.mask_pad)?,
        test: val.map(|v| evaluate(&out.model, v, cfg.mask_pad)).transpose()?,
    };
    run.write_json("eval.json", &rep)?;
    Ok(())
}

struct Tables {
    intent: EmbeddingTable,
    code: Vec<(String, EmbeddingTable)>,
}

impl Tables {
    fn load(ctx: &RunContext, run: &mut StageRun) -> Result<Self> {
        let intent = load_table(run, &ctx.config.embed.intent.name)?;
        let mut code = Vec::new();
        for v in &ctx.config.features.variants {
            if let Some(name) = v.code_preset() {
                if !code.iter().any(|(n, _)| n == name) {
                    code.push((name.to_string(), load_table(run, name)?));
                }
            }
        }
        Ok(Tables { intent, code })
    }

    fn inputs<'a>(&'a self, ctx: &RunContext, model: &'a Seq2SeqModel, v: Variant) -> FeatureInputs<'a> {
        FeatureInputs {
            model,
            intent_table: &self.intent,
            code_table: v
                .code_preset()
                .and_then(|n| self.code.iter().find(|(m, _)| m == n).map(|(_, t)| t)),
            variant: v,
            hidden_source: ctx.config.features.hidden_source,
        }
    }
}

fn load_seq2seq(run: &mut StageRun) -> Result<Seq2SeqModel> {
    Seq2SeqModel::from_checkpoint(read_checkpoint(&run.prior("train-seq2seq", "seq2seq.snf")?)?)
}

fn provenance(ctx: &RunContext, split: &str) -> serde_json::Map<String, serde_json::Value> {
    let mut m = serde_json::Map::new();
    m.insert("split".into(), split.into());
    m.insert("seed".into(), serde_json::json!(ctx.seed));
    m.insert("hidden_source".into(), serde_json::json!(ctx.config.features.hidden_source));
    m
}

fn classifier_stage(ctx: &RunContext, run: &mut StageRun, seed: u64) -> Result<()> {
    let samples: Vec<Sample> = read_jsonl::<LexedSample>(&run.prior("lex", "train.jsonl")?)?
        .into_iter()
        .map(|s| s.sample)
        .collect();
    let model = load_seq2seq(run)?;
    let tables = Tables::load(ctx, run)?;
    for &v in &ctx.config.features.variants {
        let name = v.cli_name();
        let fs = build_features(&samples, &tables.inputs(ctx, &model, v))?;
        let file = format!("features_{name}.train.snf");
        fs.save(&run.path(&file), provenance(ctx, "train"))?;
        run.record(&file)?;
        run.record(&format!("{file}.json"))?;
        let (x, y) = fs.matrix()?;
        let out = train_classifier(&x, &y, &ctx.config.classifier, derive_seed(seed, name))?;
        write_checkpoint(&run.path(&format!("classifier_{name}.snf")), &out.model.to_checkpoint())?;
        run.record(&format!("classifier_{name}.snf"))?;
        history_files(run, &format!("{name}."), &out.history, "accuracy")?;
    }
    Ok(())
}

fn evaluate_stage(ctx: &RunContext, run: &mut StageRun) -> Result<()> {
    let samples: Vec<Sample> = read_jsonl::<LexedSample>(&run.prior("lex", "test.jsonl")?)?
        .into_iter()
        .map(|s| s.sample)
        .collect();
    let model = load_seq2seq(run)?;
    let tables = Tables::load(ctx, run)?;
    let mut all = serde_json::Map::new();
    let (mut rocs, mut prs) = (Vec::new(), Vec::new());
    for &v in &ctx.config.features.variants {
        let name = v.cli_name();
        let ck = read_checkpoint(&run.prior("train-classifier", &format!("classifier_{name}.snf"))?)?;
        let fs = build_features(&samples, &tables.inputs(ctx, &model, v))?;
        let file = format!("features_{name}.test.snf");
        fs.save(&run.path(&file), provenance(ctx, "test"))?;
        run.record(&file)?;
        run.record(&format!("{file}.json"))?;
        let (x, y) = fs.matrix()?;
        let probs = predict(&x, &ck)?;
        let rep = MetricsReport::compute(&y, &probs, ctx.config.classifier.threshold)?;
        let roc = roc_auc(&y, &probs)?;
        let pr = pr_auc(&y, &probs)?;
        run.write_json(&format!("metrics_{name}.json"), &rep)?;
        run.write(&format!("roc_{name}.csv"), roc.to_csv("fpr", "tpr"))?;
        run.write(&format!("pr_{name}.csv"), pr.to_csv("recall", "precision"))?;
        rocs.push(Series::new(name, roc.points));
        prs.push(Series::new(name, pr.points));
        all.insert(name.to_string(), serde_json::to_value(&rep)?);
    }
    run.write_json("metrics.json", &all)?;
    run.write("roc.svg", line_plot_svg("ROC", "false positive rate", "true positive rate", &rocs))?;
    run.write("pr.svg", line_plot_svg("Precision-recall", "recall", "precision", &prs))?;
    Ok(())
}
