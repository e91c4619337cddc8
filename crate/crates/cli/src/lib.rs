//! `napss` command-line driver.
//!
//! Every subcommand resolves a [`RunConfig`] (defaults, then `--config` TOML,
//! then flags), takes the output-directory lock, runs, and records its inputs,
//! outputs, seed and config hash in `manifest.json`.

pub mod commands;
pub mod config;
pub mod error;
pub mod files;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use napss_core::assembler::Strategy;
use napss_core::corpus::Split;

pub use commands::StepOutput;
pub use config::{AdapterChoice, PartialConfig, RunConfig, ScorerChoice};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "napss", version, about = "Summarize-then-simplify pipeline for medical abstracts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a Cochrane-style directory of `.source`/`.target` files into corpus JSONL.
    Import {
        #[arg(long)]
        cochrane_dir: PathBuf,
    },
    /// Label abstract sentences against the plain-language summary.
    BuildDataset,
    /// Fit the sentence scorer on the train split and report dev accuracy.
    Train,
    /// Select summary sentences for every document of `--split`.
    Extract,
    /// Build narrative prompts from dependency parses.
    Prompt,
    /// Join prompts and summaries into generator inputs under `--budget`.
    Assemble,
    /// Send assembled inputs to the generation adapter.
    Simplify,
    /// Score generations against the reference summaries.
    Evaluate,
    /// build-dataset, train (when the model scorer has no model), extract, prompt,
    /// assemble, simplify and evaluate.
    Pipeline,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    match s {
        "greedy" => Ok(Strategy::Greedy),
        "sample" => Ok(Strategy::Sample),
        other => Err(format!("unknown strategy {other:?} (greedy or sample)")),
    }
}

fn parse_scorer(s: &str) -> Result<ScorerChoice, String> {
    ScorerChoice::try_from(s.to_owned())
}

fn parse_adapter(s: &str) -> Result<AdapterChoice, String> {
    AdapterChoice::try_from(s.to_owned())
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// TOML file with any of the options below; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (locked for the duration of the run).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Canonical corpus JSONL.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// CoNLL-U parses of abstract sentences: a directory of `<doc_id>.conllu` or one file with `# newdoc id` markers.
    #[arg(long, global = true)]
    pub parses: Option<PathBuf>,
    /// Labelled dataset (default: `<out>/dataset.jsonl`).
    #[arg(long, global = true)]
    pub dataset: Option<PathBuf>,
    /// Sentence-scorer model file (default: `<out>/model.json`).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    #[arg(long, global = true)]
    pub split: Option<Split>,
    /// Seed for training initialisation and decoding.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sentence-selection threshold in [0, 1].
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Token budget for assembled inputs.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// `model`, `oracle`, or an endpoint serving `/score`.
    #[arg(long, global = true, value_parser = parse_scorer)]
    pub scorer: Option<ScorerChoice>,
    /// `echo`, `http(s)://host:port`, or `exec:<program> [args]`.
    #[arg(long, global = true, value_parser = parse_adapter)]
    pub adapter_url: Option<AdapterChoice>,
    #[arg(long, global = true)]
    pub max_new_tokens: Option<u32>,
    /// `greedy` or `sample`.
    #[arg(long, global = true, value_parser = parse_strategy)]
    pub strategy: Option<Strategy>,
    #[arg(long, global = true)]
    pub top_p: Option<f64>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    #[arg(long, global = true)]
    pub learning_rate: Option<f64>,
    #[arg(long, global = true)]
    pub l2: Option<f64>,
    #[arg(long, global = true)]
    pub timeout_secs: Option<f64>,
    #[arg(long, global = true)]
    pub retries: Option<u32>,
    /// Maximum concurrent adapter or scorer requests.
    #[arg(long, global = true)]
    pub max_in_flight: Option<usize>,
    /// Endpoint serving `/semantic` for an extra similarity column.
    #[arg(long, global = true)]
    pub semantic_url: Option<String>,
}

impl Flags {
    fn into_partial(self) -> (Option<PathBuf>, PartialConfig) {
        let partial = PartialConfig {
            out: self.out,
            corpus: self.corpus,
            parses: self.parses,
            dataset: self.dataset,
            model: self.model,
            split: self.split,
            seed: self.seed,
            threshold: self.threshold,
            budget: self.budget,
            scorer: self.scorer,
            adapter_url: self.adapter_url,
            max_new_tokens: self.max_new_tokens,
            strategy: self.strategy,
            top_p: self.top_p,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            l2: self.l2,
            timeout_secs: self.timeout_secs,
            retries: self.retries,
            max_in_flight: self.max_in_flight,
            semantic_url: self.semantic_url,
        };
        (self.config, partial)
    }
}

pub fn resolve_config(flags: Flags) -> Result<RunConfig, CliError> {
    let (file, partial) = flags.into_partial();
    let file = file.map(|p| PartialConfig::from_toml_file(&p)).transpose()?;
    RunConfig::resolve(file, partial)
}

fn step(
    config: &RunConfig,
    name: &str,
    f: impl FnOnce(&RunConfig) -> Result<StepOutput, CliError>,
    log: &mut Vec<String>,
) -> Result<(), CliError> {
    let out = f(config)?;
    manifest::record(config, name, &out.inputs, &out.outputs, out.details)?;
    log.extend(out.messages.into_iter().map(|m| format!("[{name}] {m}")));
    Ok(())
}

/// Runs one command under the output lock, returning the progress lines.
pub fn execute(command: &Command, config: &RunConfig) -> Result<Vec<String>, CliError> {
    let _lock = manifest::OutputLock::acquire(&config.out)?;
    let mut log = Vec::new();
    match command {
        Command::Import { cochrane_dir } => step(config, "import", |c| commands::import(c, cochrane_dir), &mut log)?,
        Command::BuildDataset => step(config, "build-dataset", commands::build_dataset, &mut log)?,
        Command::Train => step(config, "train", commands::train, &mut log)?,
        Command::Extract => step(config, "extract", commands::extract, &mut log)?,
        Command::Prompt => step(config, "prompt", commands::prompt, &mut log)?,
        Command::Assemble => step(config, "assemble", commands::assemble, &mut log)?,
        Command::Simplify => step(config, "simplify", commands::simplify, &mut log)?,
        Command::Evaluate => step(config, "evaluate", commands::evaluate, &mut log)?,
        Command::Pipeline => {
            step(config, "build-dataset", commands::build_dataset, &mut log)?;
            if config.scorer == ScorerChoice::Model && config.model.is_none() {
                step(config, "train", commands::train, &mut log)?;
            }
            step(config, "extract", commands::extract, &mut log)?;
            step(config, "prompt", commands::prompt, &mut log)?;
            step(config, "assemble", commands::assemble, &mut log)?;
            step(config, "simplify", commands::simplify, &mut log)?;
            step(config, "evaluate", commands::evaluate, &mut log)?;
        }
    }
    Ok(log)
}

/// Parses arguments, runs, prints, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = resolve_config(cli.flags).and_then(|config| execute(&cli.command, &config));
    match result {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
