//! Configuration, seeding, run manifests and the stage drivers.
//!
//! Each stage writes into `<out>/<stage>/` and finishes with a
//! `manifest.json` listing every file it read and wrote with its SHA-256.
//! Later stages locate their inputs only through those manifests, and a
//! digest mismatch aborts the stage.

mod config;
mod manifest;
mod report;
mod seed;
mod stages;

pub use config::{
    ApiMinerConfig, EmbedConfig, FeaturesConfig, InputsConfig, PipelineConfig, ReportConfig, SplitConfig,
};
pub use manifest::{sha256_file, FileDigest, RunManifest, StageRun, MANIFEST_FILE};
pub use report::{classifier_table, curation_table, frequency_table, seq2seq_table, vocab_table, Table};
pub use seed::{derive_seed, fnv1a, splitmix64};
pub use stages::{
    python_files, run_all, run_stage, test_split, EmbedSummary, LexedSample, RunContext, Seq2SeqReport, Stage,
    StageFailure,
};
