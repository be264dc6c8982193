//! Command-line front end: `cluster` (optionally `--ablate`) and `score`.
//!
//! `cluster` writes into `--out`:
//!
//! * `assignments.tsv`: `doc_id\tcluster\tmax_prob`, one row per surviving
//!   document, taken from the first seed;
//! * `metrics.json`: a [`RunRecord`] with the resolved configuration and
//!   per-seed scores (scores only when `--labels` is given);
//! * `ablation.json` instead of the two files above when `--ablate` is set;
//! * `run.log`: a human-readable log including dropped document ids and
//!   elapsed time.
//!
//! Settings come from flags, then an optional `--config` file of
//! `key = value` lines, then built-in defaults. Exit status is 0 on success,
//! 1 for invalid input or I/O failures and 2 for numerical failures.

mod settings;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use indexmap::IndexMap;
use serde::Serialize;

use crate::checkpoint::Checkpoint;
use crate::corpus::{load_labels, preprocess, read_corpus, read_labels, Corpus};
use crate::metrics::{score, Scores};
use crate::trainer::{
    baseline_kmeans_tfidf, train_with_observer, ClusterResult, Mode, TrainConfig,
};
use crate::{Error, Result};

pub use settings::{resolve, Resolved, RunMode, SeedList, Settings};

#[derive(Debug, Parser)]
#[command(
    name = "arladv",
    version,
    about = "Attention-based short text clustering",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a corpus (one document per line)
    Cluster(Box<ClusterArgs>),
    /// Score predicted labels against gold labels
    Score(ScoreArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct ClusterArgs {
    /// Corpus file, one document per line
    #[arg(long)]
    pub corpus: PathBuf,
    /// Number of clusters
    #[arg(long)]
    pub clusters: usize,
    /// Gold labels, one integer per line, aligned with the corpus lines
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// File of `key = value` settings; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "arladv-out")]
    pub out: PathBuf,
    /// Run the eight model variants and write ablation.json
    #[arg(long)]
    pub ablate: bool,
    /// Record wall-clock seconds in metrics.json
    #[arg(long)]
    pub timing: bool,
    /// Save the first seed's parameters to model.json
    #[arg(long)]
    pub save_model: bool,
    /// Suppress per-epoch progress on stderr
    #[arg(long)]
    pub quiet: bool,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ScoreArgs {
    /// Gold labels, one integer per line
    #[arg(long = "true")]
    pub truth: PathBuf,
    /// Predicted labels, one integer per line
    #[arg(long)]
    pub pred: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreprocessSnapshot {
    pub lowercase: bool,
    pub stopwords: String,
    pub remove_irregular: bool,
    pub stem: bool,
    pub min_freq: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigSnapshot {
    pub mode: String,
    pub seeds: Vec<u64>,
    pub preprocessing: PreprocessSnapshot,
    pub train: TrainConfig,
    pub trained_parameters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRun {
    pub seed: u64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Scores>,
    pub mean_max_prob: f64,
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub config: ConfigSnapshot,
    pub documents: usize,
    pub vocabulary: usize,
    pub dropped: usize,
    pub runs: Vec<SeedRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<Scores>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std: Option<Scores>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

/// Population mean and standard deviation of each score.
pub fn summarize(scores: &[Scores]) -> Option<(Scores, Scores)> {
    if scores.is_empty() {
        return None;
    }
    let n = scores.len() as f64;
    let stat = |f: fn(&Scores) -> f64| {
        let mean = scores.iter().map(f).sum::<f64>() / n;
        let var = scores.iter().map(|s| (f(s) - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    };
    let (nmi, nmi_sd) = stat(|s| s.nmi);
    let (ari, ari_sd) = stat(|s| s.ari);
    let (acc, acc_sd) = stat(|s| s.acc);
    Some((
        Scores { nmi, ari, acc },
        Scores {
            nmi: nmi_sd,
            ari: ari_sd,
            acc: acc_sd,
        },
    ))
}

/// The ablation variants as (name, mode, configuration tweak).
pub fn ablation_variants(base: &TrainConfig) -> Vec<(&'static str, TrainConfig)> {
    let with = |f: &dyn Fn(&mut TrainConfig)| {
        let mut c = base.clone();
        c.mode = Mode::ArlAdv;
        f(&mut c);
        c
    };
    vec![
        ("ARL", with(&|c| c.mode = Mode::Arl)),
        ("ARL-Adv", with(&|_| {})),
        ("ARL-Random", with(&|c| c.mode = Mode::ArlRandom)),
        ("ARL-Adv(word)", with(&|c| c.mode = Mode::ArlAdvWord)),
        ("ARL-Adv(no train w)", with(&|c| c.train_words = false)),
        ("ARL-Adv(no train c)", with(&|c| c.train_clusters = false)),
        ("ARL-Adv w/o L1", with(&|c| c.use_pairwise = false)),
        ("ARL-Adv w/o L2", with(&|c| c.use_pointwise = false)),
    ]
}

struct Logger {
    log: String,
    quiet: bool,
}

impl Logger {
    fn line(&mut self, text: String) {
        self.log.push_str(&text);
        self.log.push('\n');
    }

    fn progress(&mut self, text: String) {
        if !self.quiet {
            eprintln!("{text}");
        }
        self.line(text);
    }
}

fn load_corpus(args: &ClusterArgs, resolved: &Resolved, log: &mut Logger) -> Result<Corpus> {
    let raw = read_corpus(&args.corpus)?;
    let mut corpus = preprocess(&raw, &resolved.preprocess)?;
    if let Some(path) = &args.labels {
        corpus = load_labels(path, corpus)?;
    }
    log.line(format!(
        "corpus {}: {} documents read, {} kept, {} dropped, vocabulary {}",
        args.corpus.display(),
        corpus.original_len,
        corpus.len(),
        corpus.dropped_ids.len(),
        corpus.vocabulary.len()
    ));
    let ids: Vec<String> = corpus.dropped_ids.iter().map(usize::to_string).collect();
    log.line(format!("dropped ids: [{}]", ids.join(", ")));
    Ok(corpus)
}

struct Outcome {
    record: RunRecord,
    first: ClusterResult,
    first_params: Option<crate::model::ModelParams>,
}

fn run_variant(
    label: &str,
    corpus: &Corpus,
    mode: RunMode,
    resolved: &Resolved,
    train: &TrainConfig,
    log: &mut Logger,
) -> Result<Outcome> {
    let mut runs = Vec::new();
    let mut first = None;
    let mut first_params = None;
    for &seed in &resolved.seeds {
        let config = TrainConfig {
            seed,
            ..train.clone()
        };
        let (params, result) = match mode {
            RunMode::KmeansTfidf => (None, baseline_kmeans_tfidf(corpus, &config)?),
            RunMode::Model(_) => {
                let (params, result) = train_with_observer(corpus, &config, |r| {
                    log.progress(format!(
                        "{label} seed {seed} epoch {} objective {:.6} churn {:.4}",
                        r.epoch + 1,
                        r.mean_objective,
                        r.churn
                    ))
                })?;
                (Some(params), result)
            }
        };
        let scores = match &corpus.labels {
            Some(labels) => Some(score(labels, &result.assignments)?),
            None => None,
        };
        if let Some(s) = &scores {
            log.line(format!(
                "{label} seed {seed}: nmi {:.4} ari {:.4} acc {:.4}",
                s.nmi, s.ari, s.acc
            ));
        }
        runs.push(SeedRun {
            seed,
            scores,
            mean_max_prob: result.mean_max_prob(),
            history: result.history.clone(),
        });
        if first.is_none() {
            first = Some(result);
            first_params = params;
        }
    }
    let all: Vec<Scores> = runs.iter().filter_map(|r| r.scores).collect();
    let (mean, std) = summarize(&all).unzip();
    let train_snapshot = TrainConfig {
        seed: resolved.seeds[0],
        ..train.clone()
    };
    let trained_parameters = match mode {
        RunMode::KmeansTfidf => 0,
        RunMode::Model(_) => train_snapshot.trained_parameters(corpus.vocabulary.len()),
    };
    let p = &resolved.preprocess;
    let record = RunRecord {
        config: ConfigSnapshot {
            mode: mode.as_str().to_string(),
            seeds: resolved.seeds.clone(),
            preprocessing: PreprocessSnapshot {
                lowercase: p.lowercase,
                stopwords: resolved.stopwords.clone(),
                remove_irregular: p.remove_irregular,
                stem: p.stem,
                min_freq: p.min_freq,
            },
            train: train_snapshot,
            trained_parameters,
        },
        documents: corpus.len(),
        vocabulary: corpus.vocabulary.len(),
        dropped: corpus.dropped_ids.len(),
        runs,
        mean,
        std,
        wall_clock_seconds: None,
    };
    Ok(Outcome {
        record,
        first: first.expect("at least one seed"),
        first_params,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn assignments_tsv(corpus: &Corpus, result: &ClusterResult) -> String {
    let mut out = String::from("doc_id\tcluster\tmax_prob\n");
    for ((doc, cluster), prob) in corpus
        .documents
        .iter()
        .zip(&result.assignments)
        .zip(&result.max_probs)
    {
        let _ = writeln!(out, "{}\t{}\t{}", doc.id, cluster, prob);
    }
    out
}

fn settings_for(args: &ClusterArgs) -> Result<Settings> {
    let file = match &args.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    Ok(file.overlay(args.settings.clone()))
}

/// Runs `cluster` and returns the record written to `metrics.json`, or the
/// ablation records keyed by variant name.
pub fn run_cluster(args: &ClusterArgs) -> Result<IndexMap<String, RunRecord>> {
    let start = Instant::now();
    let settings = settings_for(args)?;
    let resolved = resolve(&settings, args.clusters, args.labels.is_some())?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let mut log = Logger {
        log: String::new(),
        quiet: args.quiet,
    };
    let corpus = load_corpus(args, &resolved, &mut log)?;

    let mut records = IndexMap::new();
    let outcome = if args.ablate {
        for (name, config) in ablation_variants(&resolved.train) {
            let mode = RunMode::Model(config.mode);
            let outcome = run_variant(name, &corpus, mode, &resolved, &config, &mut log)?;
            records.insert(name.to_string(), outcome.record);
        }
        write(&args.out.join("ablation.json"), &to_json(&records)?)?;
        None
    } else {
        let mut outcome = run_variant(
            resolved.mode.as_str(),
            &corpus,
            resolved.mode,
            &resolved,
            &resolved.train,
            &mut log,
        )?;
        if args.timing {
            outcome.record.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
        }
        write(
            &args.out.join("assignments.tsv"),
            &assignments_tsv(&corpus, &outcome.first),
        )?;
        write(&args.out.join("metrics.json"), &to_json(&outcome.record)?)?;
        records.insert(resolved.mode.as_str().to_string(), outcome.record.clone());
        Some(outcome)
    };

    if args.save_model {
        match outcome.as_ref().and_then(|o| o.first_params.as_ref()) {
            Some(params) => {
                let path = args.out.join("model.json");
                Checkpoint::new(params, &corpus.vocabulary, &resolved.train).save(&path)?;
                log.line(format!("saved parameters to {}", path.display()));
            }
            None => log.line("no model parameters to save for this run".into()),
        }
    }
    log.line(format!("elapsed {:.3}s", start.elapsed().as_secs_f64()));
    write(&args.out.join("run.log"), &log.log)?;
    Ok(records)
}

pub fn run_score(args: &ScoreArgs) -> Result<Scores> {
    let truth = read_labels(&args.truth)?;
    let pred = read_labels(&args.pred)?;
    score(&truth, &pred)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Cluster(args) => run_cluster(args).map(|records| {
            if let Some(summary) = summary_line(&records) {
                println!("{summary}");
            }
        }),
        Command::Score(args) => run_score(args).and_then(|s| {
            println!("{}", serde_json::to_string(&s)?);
            Ok(())
        }),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                2
            } else {
                1
            }
        }
    }
}

fn summary_line(records: &IndexMap<String, RunRecord>) -> Option<String> {
    let means: BTreeMap<&str, Scores> = records
        .iter()
        .filter_map(|(k, r)| r.mean.map(|m| (k.as_str(), m)))
        .collect();
    if means.is_empty() {
        return None;
    }
    Some(
        records
            .keys()
            .filter_map(|k| means.get(k.as_str()).map(|m| (k, m)))
            .map(|(k, m)| format!("{k}: nmi {:.4} ari {:.4} acc {:.4}", m.nmi, m.ari, m.acc))
            .collect::<Vec<_>>()
            .join("\n"),
    )
}
