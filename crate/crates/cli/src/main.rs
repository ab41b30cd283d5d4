use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use snipforge::classifier::Variant;
use snipforge::pipeline::{run_all, run_stage, PipelineConfig, RunContext, RunManifest, Stage, StageFailure};

/// Curates intent/snippet corpora and trains the embedding, seq2seq and
/// match-classifier stack. Each subcommand runs one stage and writes its
/// artifacts plus a manifest under `--out`.
#[derive(Debug, Parser)]
#[command(name = "snipforge", version, arg_required_else_help = true)]
struct Cli {
    /// TOML config; missing sections take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Global seed (overrides the config's `seed`).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "SNIPFORGE_OUT", default_value = "runs", value_name = "DIR")]
    out: PathBuf,
    /// Allow randomized stages to run without a seed.
    #[arg(long, global = true)]
    nondeterministic: bool,
    /// Exclude padded decoder positions from the seq2seq loss.
    #[arg(long, global = true)]
    mask_pad: bool,
    /// Restrict classifier training and evaluation to one code-vector variant.
    #[arg(long, global = true, value_parser = parse_variant)]
    variant: Option<Variant>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load, clean, de-duplicate and merge the corpora; add negatives.
    Curate,
    /// Mine API names from intents and imports; write the whitelist.
    MineApis,
    /// Tokenize and normalize snippets; split train/test.
    Lex,
    /// Train the intent and code embedding presets.
    Embed,
    /// Train the encoder/decoder LSTM.
    TrainSeq2seq,
    /// Build pair features and train one classifier per variant.
    TrainClassifier,
    /// Score the test split.
    Evaluate,
    /// Write the summary tables and plots.
    Report,
    /// Run every stage in order.
    Pipeline,
    /// Validate the config and print it with defaults filled in.
    ValidateConfig,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: snipforge::Error| e.to_string())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn fail(stage: &str, kind: &str, msg: &str) -> ExitCode {
    eprintln!("error stage={stage} kind={kind} msg={}", one_line(msg));
    ExitCode::from(1)
}

fn report(m: &RunManifest) {
    println!(
        "ok stage={} outputs={} ms={}",
        m.stage,
        m.outputs.len(),
        m.duration_ms
    );
}

fn load_config(cli: &Cli) -> snipforge::Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if cli.mask_pad {
        cfg.seq2seq.mask_pad = true;
    }
    if let Some(v) = cli.variant {
        cfg.features.variants = vec![v];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();

    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => return fail("config", e.kind(), &e.to_string()),
    };
    snipforge::par::set_threads(cfg.threads);

    let stage = match cli.command {
        Command::ValidateConfig => {
            return match cfg.to_toml() {
                Ok(text) => {
                    print!("{text}");
                    println!("# embed jobs: {}", cfg.embed_jobs().join(", "));
                    ExitCode::SUCCESS
                }
                Err(e) => fail("config", e.kind(), &e.to_string()),
            };
        }
        Command::Pipeline => None,
        Command::Curate => Some(Stage::Curate),
        Command::MineApis => Some(Stage::MineApis),
        Command::Lex => Some(Stage::Lex),
        Command::Embed => Some(Stage::Embed),
        Command::TrainSeq2seq => Some(Stage::TrainSeq2seq),
        Command::TrainClassifier => Some(Stage::TrainClassifier),
        Command::Evaluate => Some(Stage::Evaluate),
        Command::Report => Some(Stage::Report),
    };
    let ctx = RunContext::new(cfg, &cli.out, cli.seed, cli.nondeterministic);
    let result = match stage {
        Some(s) => run_stage(&ctx, s).map(|m| vec![m]),
        None => run_all(&ctx),
    };
    match result {
        Ok(ms) => {
            ms.iter().for_each(report);
            ExitCode::SUCCESS
        }
        Err(StageFailure { stage, error }) => fail(stage.name(), error.kind(), &error.to_string()),
    }
}
