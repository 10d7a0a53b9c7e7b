use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "relwsd", version, about = "Word sense disambiguation from wordnet relatives")]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

/// Every subcommand serializes into the run manifest; `replay` reads it back.
#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// List the relatives of target words and their counts.
    Relatives(RelativesArgs),
    /// Keep only the sentences that pass the quality filter.
    Filter(FilterArgs),
    /// Train one model per target word from a tagged corpus.
    Train(TrainArgs),
    /// Label target-word occurrences with trained models.
    Classify(ClassifyArgs),
    /// Score the classifier and the baselines on a gold test set.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic wordnet, corpus, test set and sense mapping.
    Synth(SynthArgs),
    /// Accuracy against training-corpus size on synthetic data.
    Sweep(SweepArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn run_args(&self) -> Option<&RunArgs> {
        match self {
            Command::Relatives(a) => Some(&a.run),
            Command::Filter(a) => Some(&a.run),
            Command::Train(a) => Some(&a.run),
            Command::Classify(a) => Some(&a.run),
            Command::Evaluate(a) => Some(&a.run),
            Command::Synth(a) => Some(&a.run),
            Command::Sweep(a) => Some(&a.run),
            Command::Replay(_) => None,
        }
    }

    pub fn run_args_mut(&mut self) -> Option<&mut RunArgs> {
        match self {
            Command::Relatives(a) => Some(&mut a.run),
            Command::Filter(a) => Some(&mut a.run),
            Command::Train(a) => Some(&mut a.run),
            Command::Classify(a) => Some(&mut a.run),
            Command::Evaluate(a) => Some(&mut a.run),
            Command::Synth(a) => Some(&mut a.run),
            Command::Sweep(a) => Some(&mut a.run),
            Command::Replay(_) => None,
        }
    }

    pub fn jobs(&self) -> usize {
        self.run_args().map_or(1, |r| r.jobs)
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Evaluate(a) => Some(a.seed),
            Command::Synth(a) => Some(a.spec.seed),
            Command::Sweep(a) => Some(a.spec.seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RunArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Worker threads; 1 runs everything on the calling thread.
    #[arg(long, default_value_t = 1, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..=1024))]
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FilterFlags {
    #[arg(long, default_value_t = 150)]
    pub min_chars: usize,
    #[arg(long, default_value_t = 5)]
    pub min_words: usize,
    #[arg(long, default_value_t = 4)]
    pub min_pos_classes: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RelativesArgs {
    #[arg(long)]
    pub wordnet: PathBuf,
    /// Target lemma (repeatable).
    #[arg(long = "word", required = true)]
    pub words: Vec<String>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u8).range(1..=6))]
    pub level: u8,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FilterArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub filter: FilterFlags,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ModelFlags {
    /// Relative strategy level, 1 to 6 (6 adds one-sense-per-discourse harvesting).
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u8).range(1..=6))]
    pub level: u8,
    /// Feature channels, comma-separated from L, Lp, I, I0.
    #[arg(long, default_value = "L,Lp,I")]
    pub features: String,
    /// Leave punctuation lemmas out of the L channel.
    #[arg(long)]
    pub no_punct_lemmas: bool,
    /// Tag attribute values removed for I0, comma-separated (default: NKJP genders).
    #[arg(long)]
    pub genders: Option<String>,
    /// Additive smoothing of feature probabilities.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Drop feature keys seen fewer times than this.
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// Relative matches needed before a document's target-word occurrences are harvested (level 6).
    #[arg(long, default_value_t = 1)]
    pub harvest_min: usize,
    #[command(flatten)]
    pub filter: FilterFlags,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub wordnet: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Target lemma (repeatable).
    #[arg(long = "word", required = true)]
    pub words: Vec<String>,
    #[command(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PriorFlags {
    /// Use the standard posterior instead of the prior-free rule.
    #[arg(long)]
    pub standard: bool,
    /// `empirical`, `uniform`, or a JSON file `{word: {sense: p}}`.
    #[arg(long, default_value = "empirical")]
    pub priors: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ClassifyArgs {
    /// Directory of model files written by `train`.
    #[arg(long)]
    pub models: PathBuf,
    /// Occurrences to label: `{word, span_start, tokens}` per line.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub priors: PriorFlags,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub wordnet: PathBuf,
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long)]
    pub mapping: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Seed of the random baseline.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Priors of the standard classifier: `empirical`, `uniform` or a JSON file.
    #[arg(long, default_value = "empirical")]
    pub priors: String,
    /// Resolve context words of the similarity baseline to their first sense only.
    #[arg(long)]
    pub similarity_first_sense: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SpecFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "zamek")]
    pub target: String,
    #[arg(long, default_value_t = 2)]
    pub senses: usize,
    #[arg(long, default_value_t = 1000)]
    pub documents: usize,
    #[arg(long, default_value_t = 200)]
    pub test_cases: usize,
    #[arg(long, default_value_t = 20)]
    pub sentences_per_doc: usize,
    /// Training sense weights, colon-separated (e.g. 10:1).
    #[arg(long)]
    pub prior: Option<String>,
    /// Test sense weights, colon-separated.
    #[arg(long)]
    pub test_prior: Option<String>,
    /// Share of the content vocabulary common to all senses.
    #[arg(long, default_value_t = 0.5)]
    pub overlap: f64,
    #[arg(long, default_value_t = 40)]
    pub signature_size: usize,
    #[arg(long, default_value_t = 2)]
    pub relatives_per_sense: usize,
    #[arg(long, default_value_t = 3)]
    pub context_words: usize,
    #[arg(long, default_value_t = 0.2)]
    pub relative_rate: f64,
    #[arg(long, default_value_t = 0.05)]
    pub target_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[command(flatten)]
    pub spec: SpecFlags,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    /// Training-corpus sizes in documents, ascending, comma-separated.
    #[arg(long, required = true)]
    pub sizes: String,
    #[command(flatten)]
    pub spec: SpecFlags,
    #[command(flatten)]
    pub model: ModelFlags,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory of the new run.
    #[arg(long)]
    pub out: PathBuf,
}
