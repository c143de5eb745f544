//! Command-line front end. Machine output (JSON) goes to stdout, diagnostics
//! to stderr. Exit codes: 0 success, 1 runtime failure, 2 usage or contract
//! error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::corpus::{self, BuildConfig};
use crate::diff::{diff_texts, line_diff_hunks, DEFAULT_HUNK_GAP};
use crate::error::{Error, Result};
use crate::evolution::{build_path, edr_steps, DEFAULT_EDR_CAP};
use crate::lexer::{code_tokens, LanguageProfile};
use crate::metrics::{score_files, CodeBleuWeights, Metric, ScoreOptions};
use crate::noising::Task;

/// Environment variable consulted for the global seed when `--seed` is absent.
pub const SEED_ENV: &str = "DIVOT_SEED";

#[derive(Debug, Parser)]
#[command(name = "divot-forge", version, about = "Build diff-based code-edit pre-training corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Show the token edit script or the line hunks between two files.
    Diff(DiffArgs),
    /// Print the evolution path (intermediate states) between two files.
    Evolve(EvolveArgs),
    /// Generate a training corpus from a JSONL file of edit records.
    Build(BuildArgs),
    /// Print statistics of a generated corpus.
    Stats(StatsArgs),
    /// Score predictions against references.
    Score(ScoreArgs),
}

#[derive(Debug, Args)]
struct LangArgs {
    /// Built-in language profile: java, rust or generic. Inferred from the
    /// file extension when omitted.
    #[arg(long, value_name = "NAME")]
    lang: Option<String>,
    /// Custom language profile (JSON); overrides --lang.
    #[arg(long, value_name = "FILE")]
    profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiffArgs {
    #[arg(long, value_name = "FILE")]
    old: PathBuf,
    #[arg(long, value_name = "FILE")]
    new: PathBuf,
    /// Print the token-level edit script (default).
    #[arg(long, conflicts_with = "hunks")]
    tokens: bool,
    /// Print line-level hunks instead.
    #[arg(long)]
    hunks: bool,
    /// Unchanged lines needed to separate two hunks.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_HUNK_GAP)]
    gap: usize,
    #[command(flatten)]
    lang: LangArgs,
}

#[derive(Debug, Args)]
struct EvolveArgs {
    #[arg(long, value_name = "FILE")]
    old: PathBuf,
    #[arg(long, value_name = "FILE")]
    new: PathBuf,
    #[arg(long, value_name = "N", default_value_t = DEFAULT_HUNK_GAP)]
    gap: usize,
    /// Most EDR intermediates to select; 0 keeps all.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_EDR_CAP)]
    cap: usize,
    #[command(flatten)]
    lang: LangArgs,
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// Input records (JSONL with id, old, new, nl, lang).
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Output corpus (JSONL). Statistics go to <stem>.stats.json next to it.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Global seed. Falls back to $DIVOT_SEED, then the config, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core). Does not change the output.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// JSON build configuration; flags given here override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Comma-separated tasks to generate: ksm,rm,dae,edr.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    tasks: Option<Vec<String>>,
    /// Test-set file(s) whose code must not appear in the corpus.
    #[arg(long = "test-set", value_name = "FILE", num_args = 1..)]
    test_set: Vec<PathBuf>,
    #[arg(long, value_name = "N")]
    gap: Option<usize>,
    /// Most EDR intermediates per record; 0 keeps all.
    #[arg(long, value_name = "N")]
    cap: Option<usize>,
    /// Reject records with more tokens than this on either side.
    #[arg(long, value_name = "N")]
    max_tokens: Option<usize>,
    /// Leave NL guidance out of the inputs.
    #[arg(long)]
    no_nl: bool,
    #[arg(long, value_name = "RATE")]
    ksm_rate: Option<f64>,
    #[arg(long, value_name = "RATE")]
    rm_rate: Option<f64>,
    #[arg(long, value_name = "MEAN")]
    rm_spans: Option<f64>,
    #[arg(long, value_name = "P")]
    dae_replace: Option<f64>,
    #[arg(long, value_name = "P")]
    dae_delete: Option<f64>,
    #[arg(long, value_name = "RATE")]
    dae_insert: Option<f64>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Predictions, one per line.
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    /// References, line-aligned with --pred.
    #[arg(long, value_name = "FILE")]
    gold: PathBuf,
    /// Sources (pre-edit code), needed for SARI.
    #[arg(long, value_name = "FILE")]
    src: Option<PathBuf>,
    /// Profile for normalization and CodeBLEU keywords.
    #[arg(long, value_name = "NAME", default_value = "generic")]
    lang: String,
    /// Compare after dropping comments, collapsing whitespace and lowercasing.
    #[arg(long)]
    normalize: bool,
    /// Comma-separated metrics: em,bleu,sari,codebleu. Default: all available.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    metrics: Option<Vec<String>>,
    /// Pool n-gram counts over the whole file instead of averaging per line.
    #[arg(long)]
    corpus_bleu: bool,
    /// CodeBLEU weights alpha,beta,gamma,delta.
    #[arg(long, value_name = "A,B,C,D", value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Weight of keyword unigrams in weighted BLEU.
    #[arg(long, value_name = "W", default_value_t = crate::metrics::DEFAULT_KEYWORD_WEIGHT)]
    keyword_weight: f64,
}

/// Parse `argv` (including the program name) and run the verb.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let result = match cli.command {
        Command::Diff(a) => diff(a, out),
        Command::Evolve(a) => evolve(a, out),
        Command::Build(a) => build(a, out, err),
        Command::Stats(a) => stats(a, out),
        Command::Score(a) => score(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_contract_violation() {
                2
            } else {
                1
            }
        }
    }
}

fn emit(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn resolve_profile(args: &LangArgs, hint: &Path) -> Result<LanguageProfile> {
    if let Some(path) = &args.profile {
        return LanguageProfile::load(path);
    }
    match &args.lang {
        Some(name) => named_profile(name),
        None => {
            let ext = hint.extension().and_then(|e| e.to_str()).unwrap_or("");
            Ok(LanguageProfile::for_language(ext).clone())
        }
    }
}

fn named_profile(name: &str) -> Result<LanguageProfile> {
    LanguageProfile::builtin(name)
        .cloned()
        .ok_or_else(|| Error::Config(format!("unknown language {name:?} (try java, rust or generic)")))
}

fn diff(a: DiffArgs, out: &mut dyn Write) -> Result<()> {
    let (old, new) = (read(&a.old)?, read(&a.new)?);
    if a.hunks {
        return emit(out, &line_diff_hunks(&old, &new, a.gap));
    }
    let profile = resolve_profile(&a.lang, &a.old)?;
    let texts = |s: &str| -> Vec<String> { code_tokens(s, &profile).into_iter().map(|t| t.text).collect() };
    emit(out, &diff_texts(&texts(&old), &texts(&new)))
}

fn cap_option(cap: usize) -> Option<usize> {
    (cap > 0).then_some(cap)
}

fn evolve(a: EvolveArgs, out: &mut dyn Write) -> Result<()> {
    let (old, new) = (read(&a.old)?, read(&a.new)?);
    let profile = resolve_profile(&a.lang, &a.old)?;
    let hunks = line_diff_hunks(&old, &new, a.gap);
    let id = a.old.file_stem().and_then(|s| s.to_str()).unwrap_or("record");
    let path = build_path(id, &old, &hunks, &profile)?;
    emit(
        out,
        &json!({
            "hunk_count": path.hunk_count(),
            "states": path.states,
            "hunks": path.hunks,
            "edr_t": edr_steps(path.hunk_count(), cap_option(a.cap)),
        }),
    )
}

fn parse_tasks(names: &[String]) -> Result<std::collections::BTreeSet<Task>> {
    names
        .iter()
        .map(|n| Task::parse(n).ok_or_else(|| Error::Config(format!("unknown task {n:?} (ksm, rm, dae, edr)"))))
        .collect()
}

fn build_config(a: &BuildArgs) -> Result<BuildConfig> {
    let mut cfg = match &a.config {
        Some(path) => BuildConfig::load(path)?,
        None => BuildConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.global_seed = seed;
    } else if let Ok(v) = std::env::var(SEED_ENV) {
        cfg.global_seed = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
    }
    if let Some(t) = &a.tasks {
        cfg.tasks_enabled = parse_tasks(t)?;
    }
    cfg.test_set_paths.extend(a.test_set.iter().cloned());
    if let Some(g) = a.gap {
        cfg.hunk_gap = g;
    }
    if let Some(c) = a.cap {
        cfg.edr_cap = cap_option(c);
    }
    if let Some(m) = a.max_tokens {
        cfg.max_tokens_per_side = m;
    }
    if a.no_nl {
        cfg.include_nl = false;
    }
    let n = &mut cfg.noise;
    for (flag, field) in [
        (a.ksm_rate, &mut n.ksm_rate),
        (a.rm_rate, &mut n.rm_rate),
        (a.rm_spans, &mut n.rm_mean_spans),
        (a.dae_replace, &mut n.dae_replace),
        (a.dae_delete, &mut n.dae_delete),
        (a.dae_insert, &mut n.dae_insert),
    ] {
        if let Some(v) = flag {
            *field = v;
        }
    }
    cfg.workers = a.workers;
    cfg.validate()?;
    Ok(cfg)
}

fn build(a: BuildArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = build_config(&a)?;
    let ingested = corpus::ingest(&a.input)?;
    if !ingested.warnings.is_empty() {
        let _ = writeln!(
            err,
            "warning: skipped {} malformed line(s) in {}",
            ingested.warnings.len(),
            a.input.display()
        );
    }
    let stats = corpus::build(ingested.records, &cfg, &a.out)?;
    emit(out, &stats)
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<()> {
    emit(out, &corpus::stats(&a.input)?)
}

fn score(a: ScoreArgs, out: &mut dyn Write) -> Result<()> {
    let metrics = a
        .metrics
        .as_ref()
        .map(|m| m.iter().map(|s| s.parse::<Metric>()).collect::<Result<_>>())
        .transpose()?;
    let weights = match a.weights.as_deref() {
        Some(&[alpha, beta, gamma, delta]) => CodeBleuWeights::new(alpha, beta, gamma, delta)?,
        Some(w) => return Err(Error::Config(format!("--weights takes 4 values, got {}", w.len()))),
        None => CodeBleuWeights::default(),
    };
    let opts = ScoreOptions {
        normalize: a.normalize,
        metrics,
        corpus_bleu: a.corpus_bleu,
        profile: named_profile(&a.lang)?,
        weights,
        keyword_weight: a.keyword_weight,
    };
    emit(out, &score_files(&a.pred, &a.gold, a.src.as_deref(), &opts)?)
}
