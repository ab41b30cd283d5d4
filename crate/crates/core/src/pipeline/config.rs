use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::{ClassifierConfig, HiddenSource, Variant};
use crate::corpus::{CurationConfig, InputFormat};
use crate::embed::{EmbedPreset, GloveConfig, SkipgramConfig};
use crate::seq2seq::Seq2SeqConfig;
use crate::{Error, Result};

/// Input files. Relative paths are resolved against the config file's
/// directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputsConfig {
    pub conala_curated: Option<PathBuf>,
    pub conala_mined: Option<PathBuf>,
    pub staqc: Option<PathBuf>,
    /// `jsonl` or `tsv`.
    pub format: String,
    /// Python sources scanned for imports and used as the extra code corpus.
    pub dev_dir: Option<PathBuf>,
    /// Library member lists in whitelist format.
    pub member_db: Option<PathBuf>,
}

impl Default for InputsConfig {
    fn default() -> Self {
        InputsConfig {
            conala_curated: None,
            conala_mined: None,
            staqc: None,
            format: "jsonl".into(),
            dev_dir: None,
            member_db: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApiMinerConfig {
    pub top_k: usize,
    pub extra_stopwords: Vec<String>,
}

impl Default for ApiMinerConfig {
    fn default() -> Self {
        ApiMinerConfig {
            top_k: crate::apiminer::DEFAULT_TOP_K,
            extra_stopwords: Vec::new(),
        }
    }
}

/// Held-out test split of the labelled pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub test_fraction: f64,
    /// Share of positives in the test split (515 of 1000 by default).
    pub test_positive_share: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            test_fraction: 0.2,
            test_positive_share: 0.515,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedConfig {
    pub intent: EmbedPreset,
    pub code: Vec<EmbedPreset>,
    pub negatives: usize,
    pub w2v_lr: f64,
    /// Skip-gram shards per epoch; 0 or 1 trains sequentially.
    pub shards: usize,
    pub glove_lr: f64,
    pub x_max: f64,
    pub alpha: f64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        let sg = SkipgramConfig::default();
        let gl = GloveConfig::default();
        EmbedConfig {
            intent: EmbedPreset::intent(),
            code: EmbedPreset::code_presets(),
            negatives: sg.negatives,
            w2v_lr: sg.lr,
            shards: sg.shards,
            glove_lr: gl.lr,
            x_max: gl.x_max,
            alpha: gl.alpha,
        }
    }
}

impl EmbedConfig {
    pub fn presets(&self) -> impl Iterator<Item = &EmbedPreset> {
        std::iter::once(&self.intent).chain(&self.code)
    }

    pub fn skipgram(&self, p: &EmbedPreset, seed: u64) -> SkipgramConfig {
        SkipgramConfig {
            dim: p.dim,
            window: p.window,
            negatives: self.negatives,
            epochs: p.epochs,
            lr: self.w2v_lr,
            seed,
            shards: self.shards,
        }
    }

    pub fn glove(&self, p: &EmbedPreset, seed: u64) -> GloveConfig {
        GloveConfig {
            dim: p.dim,
            epochs: p.epochs,
            lr: self.glove_lr,
            x_max: self.x_max,
            alpha: self.alpha,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesConfig {
    pub variants: Vec<Variant>,
    pub hidden_source: HiddenSource,
    /// Code preset whose vectors initialise the seq2seq code embedding;
    /// empty means random initialisation.
    pub seq2seq_code_table: String,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        FeaturesConfig {
            variants: Variant::ALL.to_vec(),
            hidden_source: HiddenSource::Decoder,
            seq2seq_code_table: "w2v-current".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    /// Rows of the token frequency tables.
    pub frequency_rows: usize,
    /// Most frequent tokens drawn in PCA plots.
    pub pca_tokens: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            frequency_rows: 20,
            pca_tokens: 40,
        }
    }
}

/// Every tunable of every stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub inputs: InputsConfig,
    pub curation: CurationConfig,
    pub apiminer: ApiMinerConfig,
    pub split: SplitConfig,
    pub embed: EmbedConfig,
    pub seq2seq: Seq2SeqConfig,
    pub classifier: ClassifierConfig,
    pub features: FeaturesConfig,
    pub report: ReportConfig,
}

fn probe(doc: toml::Table, path: &str, errs: &mut Vec<String>) {
    if let Err(e) = toml::Value::Table(doc).try_into::<PipelineConfig>() {
        errs.push(format!("{path}: {}", e.message().trim()));
    }
}

/// Tries each leaf key on its own so that every bad key is reported, not
/// only the first one serde trips over.
fn probe_keys(root: &toml::Table, errs: &mut Vec<String>) {
    for (k, v) in root {
        match v {
            toml::Value::Table(sub) if !sub.is_empty() => {
                for (k2, v2) in sub {
                    let mut inner = toml::Table::new();
                    inner.insert(k2.clone(), v2.clone());
                    let mut doc = toml::Table::new();
                    doc.insert(k.clone(), toml::Value::Table(inner));
                    probe(doc, &format!("{k}.{k2}"), errs);
                }
            }
            _ => {
                let mut doc = toml::Table::new();
                doc.insert(k.clone(), v.clone());
                probe(doc, k, errs);
            }
        }
    }
}

fn collect(errs: &mut Vec<String>, r: Result<()>) {
    match r {
        Ok(()) => {}
        Err(Error::Config(mut e)) => errs.append(&mut e),
        Err(e) => errs.push(e.to_string()),
    }
}

impl PipelineConfig {
    /// Parses TOML, fills defaults and validates. All problems are returned
    /// together in one [`Error::Config`].
    pub fn parse(text: &str) -> Result<Self> {
        let root: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(vec![format!("toml: {}", e.message().trim())]))?;
        let mut errs = Vec::new();
        probe_keys(&root, &mut errs);
        if !errs.is_empty() {
            return Err(Error::Config(errs));
        }
        let cfg: PipelineConfig = toml::Value::Table(root)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(vec![e.message().trim().to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and parses a config file, resolving input paths against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.inputs.resolve(base);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        collect(&mut errs, self.curation.validate());
        collect(&mut errs, self.seq2seq.validate());
        collect(&mut errs, self.classifier.validate());
        if self.inputs.format.parse::<InputFormat>().is_err() {
            errs.push(format!("inputs.format {:?} must be jsonl or tsv", self.inputs.format));
        }
        if self.apiminer.top_k == 0 {
            errs.push("apiminer.top_k must be positive".into());
        }
        let s = &self.split;
        if !(s.test_fraction > 0.0 && s.test_fraction < 1.0) {
            errs.push(format!("split.test_fraction {} out of (0,1)", s.test_fraction));
        }
        if !(0.0..=1.0).contains(&s.test_positive_share) {
            errs.push(format!("split.test_positive_share {} out of [0,1]", s.test_positive_share));
        }
        let e = &self.embed;
        let mut names = BTreeSet::new();
        for p in e.presets() {
            if !names.insert(p.name.as_str()) {
                errs.push(format!("embed: duplicate preset name {:?}", p.name));
            }
            if p.dim == 0 || p.window == 0 {
                errs.push(format!("embed preset {:?}: dim and window must be positive", p.name));
            }
            if p.name.is_empty() || p.name.contains(['/', '\\']) {
                errs.push(format!("embed preset {:?}: name must be a plain file stem", p.name));
            }
        }
        if e.intent.corpus != crate::embed::CorpusTag::Intent {
            errs.push("embed.intent must train on the intent corpus".into());
        }
        if e.code.iter().any(|p| p.corpus == crate::embed::CorpusTag::Intent) {
            errs.push("embed.code presets must train on a code corpus".into());
        }
        for (name, v) in [("embed.w2v_lr", e.w2v_lr), ("embed.glove_lr", e.glove_lr), ("embed.x_max", e.x_max)] {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("{name} {v} must be a positive number"));
            }
        }
        if e.negatives == 0 {
            errs.push("embed.negatives must be positive".into());
        }
        let f = &self.features;
        if f.variants.is_empty() {
            errs.push("features.variants is empty".into());
        }
        for v in &f.variants {
            if let Some(p) = v.code_preset() {
                if !e.code.iter().any(|c| c.name == p) {
                    errs.push(format!("variant {} needs embed preset {p:?}", v.cli_name()));
                }
            }
        }
        if !f.seq2seq_code_table.is_empty() && !e.code.iter().any(|c| c.name == f.seq2seq_code_table) {
            errs.push(format!("features.seq2seq_code_table {:?} is not a code preset", f.seq2seq_code_table));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Names of the embedding jobs this config schedules, intent model first.
    pub fn embed_jobs(&self) -> Vec<String> {
        self.embed.presets().map(|p| p.name.clone()).collect()
    }
}

impl InputsConfig {
    fn resolve(&mut self, base: &Path) {
        for p in [
            &mut self.conala_curated,
            &mut self.conala_mined,
            &mut self.staqc,
            &mut self.dev_dir,
            &mut self.member_db,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<String> {
        match PipelineConfig::parse(text) {
            Err(Error::Config(e)) => e,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg = PipelineConfig::parse("").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        assert_eq!(cfg.curation.sim_threshold, 0.5);
        assert_eq!(cfg.classifier.hidden, [100, 50, 25]);
        assert_eq!(cfg.seq2seq.batch, 256);
        // The normalized echo parses back to the same config.
        assert_eq!(PipelineConfig::parse(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn range_errors_are_reported() {
        let e = errors("[curation]\nsim_threshold = 1.5\n");
        assert_eq!(e.len(), 1);
        assert!(e[0].contains("out of [0,1]"), "{e:?}");
    }

    #[test]
    fn all_type_errors_at_once() {
        let e = errors("threads = \"many\"\nbogus = 1\n[curation]\nmax_lines = \"five\"\n[seq2seq]\nhidden = -3\n");
        assert_eq!(e.len(), 4, "{e:?}");
        assert!(e.iter().any(|m| m.starts_with("bogus")));
        assert!(e.iter().any(|m| m.starts_with("curation.max_lines")));
        assert!(e.iter().any(|m| m.starts_with("seq2seq.hidden")));
    }

    #[test]
    fn semantic_errors_are_collected() {
        let e = errors("[curation]\nprob_threshold = -1.0\n[classifier]\nhidden = [10, 20]\n[split]\ntest_fraction = 0.0\n");
        assert_eq!(e.len(), 3, "{e:?}");
    }

    #[test]
    fn four_code_presets_schedule_four_embed_jobs() {
        let text = r#"
[embed]
code = [
  { name = "w2v-current", algorithm = "w2v", corpus = "current", window = 15, min_count = 1, epochs = 10 },
  { name = "glove-current", algorithm = "glove", corpus = "current", window = 15, min_count = 1, epochs = 10 },
  { name = "w2v-csn", algorithm = "w2v", corpus = "current_dev", window = 15, min_count = 5, epochs = 10 },
  { name = "glove-csn", algorithm = "glove", corpus = "current_dev", window = 15, min_count = 1, epochs = 10 },
]
"#;
        let cfg = PipelineConfig::parse(text).unwrap();
        assert_eq!(cfg.embed.code.len(), 4);
        assert_eq!(cfg.embed_jobs(), ["intent-w2v", "w2v-current", "glove-current", "w2v-csn", "glove-csn"]);
        assert_eq!(cfg.embed.code, EmbedPreset::code_presets());
    }

    #[test]
    fn variants_need_their_presets() {
        let e = errors("[embed]\ncode = []\n[features]\nvariants = [\"hidden\", \"w2v-current\"]\nseq2seq_code_table = \"\"\n");
        assert_eq!(e.len(), 1, "{e:?}");
        let ok = PipelineConfig::parse("[embed]\ncode = []\n[features]\nvariants = [\"hidden\"]\nseq2seq_code_table = \"\"\n");
        assert!(ok.is_ok());
    }

    #[test]
    fn relative_inputs_resolve_against_the_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[inputs]\nstaqc = \"data/s.jsonl\"\n").unwrap();
        let cfg = PipelineConfig::load(&path).unwrap();
        assert_eq!(cfg.inputs.staqc.unwrap(), dir.path().join("data/s.jsonl"));
    }
}
