//! Corpus ingestion, test-set deduplication and sample generation.
//!
//! Records are processed independently. Each gets its own seeds derived from
//! `(global_seed, record id, task)`, and results are written back in input
//! order, so the output file is identical for any worker count.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use aho_corasick::AhoCorasick;
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diff::{line_diff_hunks, DEFAULT_HUNK_GAP};
use crate::error::{Error, Result};
use crate::evolution::{build_path, edr_samples, DEFAULT_EDR_CAP};
use crate::lexer::LanguageProfile;
use crate::noising::{dae_sample, ksm_sample, rm_sample, EditPair, NoiseConfig, Task, TrainingSample};
use crate::seed::derive_seed;

/// Records handed to the worker pool at a time.
const CHUNK: usize = 2048;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub old: String,
    pub new: String,
    #[serde(default)]
    pub nl: Option<String>,
    #[serde(default = "default_lang")]
    pub lang: String,
}

fn default_lang() -> String {
    "generic".into()
}

/// A skipped input line and why.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchemaWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct Ingested {
    pub records: Vec<CorpusRecord>,
    pub warnings: Vec<SchemaWarning>,
}

pub fn ingest(path: impl AsRef<Path>) -> Result<Ingested> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(BufReader::new(file), path)
}

/// Parse JSONL records. Malformed or invalid lines become warnings; only I/O
/// failures abort.
pub fn ingest_reader(reader: impl BufRead, source: &Path) -> Result<Ingested> {
    let mut out = Ingested::default();
    let mut ids = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut reject = |message: String| {
            warn!("{}:{line_no}: {message}", source.display());
            out.warnings.push(SchemaWarning {
                line: line_no,
                message,
            });
        };
        let record: CorpusRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                reject(format!("malformed record: {e}"));
                continue;
            }
        };
        if record.id.is_empty() {
            reject("empty id".into());
        } else if record.old.is_empty() || record.new.is_empty() {
            reject(format!("record {:?} has empty old or new code", record.id));
        } else if !ids.insert(record.id.clone()) {
            reject(format!("duplicate id {:?}", record.id));
        } else {
            out.records.push(record);
        }
    }
    Ok(out)
}

/// Collapse whitespace runs to single spaces and trim.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TestLine {
    Object { code: String },
    Bare(String),
}

/// Code strings of line-JSON test sets, whitespace-collapsed. Lines are
/// either `{"code": ...}` objects (other fields ignored) or bare JSON strings.
pub fn load_test_sets(paths: &[PathBuf]) -> Result<Vec<String>> {
    let mut patterns = Vec::new();
    for path in paths {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<TestLine>(&line) {
                Ok(TestLine::Object { code } | TestLine::Bare(code)) => {
                    let code = collapse_whitespace(&code);
                    if !code.is_empty() {
                        patterns.push(code);
                    }
                }
                Err(_) => warn!("{}:{}: test-set line without a code field", path.display(), i + 1),
            }
        }
    }
    Ok(patterns)
}

/// Multi-pattern containment test over whitespace-collapsed text.
pub struct Deduplicator {
    matcher: Option<AhoCorasick>,
}

impl Deduplicator {
    pub fn new(patterns: &[String]) -> Self {
        let patterns: Vec<&String> = patterns.iter().filter(|p| !p.is_empty()).collect();
        let matcher = if patterns.is_empty() {
            None
        } else {
            Some(AhoCorasick::new(patterns).expect("test-set automaton fits in memory"))
        };
        Deduplicator { matcher }
    }

    /// True when any pattern occurs in the old or the new code. Both sides are
    /// joined by a newline, which collapsed patterns cannot contain, and
    /// searched in one pass.
    pub fn is_contaminated(&self, record: &CorpusRecord) -> bool {
        let Some(m) = &self.matcher else {
            return false;
        };
        let hay = format!(
            "{}\n{}",
            collapse_whitespace(&record.old),
            collapse_whitespace(&record.new)
        );
        m.is_match(&hay)
    }
}

#[derive(Clone, Debug, Default)]
pub struct DedupOutcome {
    pub kept: Vec<CorpusRecord>,
    pub dropped: Vec<String>,
}

/// Drop every record that contains a test-set code string.
pub fn dedup_filter(records: Vec<CorpusRecord>, test_sets: &[PathBuf]) -> Result<DedupOutcome> {
    let dedup = Deduplicator::new(&load_test_sets(test_sets)?);
    let mut out = DedupOutcome::default();
    for r in records {
        if dedup.is_contaminated(&r) {
            out.dropped.push(r.id);
        } else {
            out.kept.push(r);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildConfig {
    pub noise: NoiseConfig,
    pub hunk_gap: usize,
    /// `None` keeps every intermediate state.
    pub edr_cap: Option<usize>,
    pub max_tokens_per_side: usize,
    pub global_seed: u64,
    pub tasks_enabled: BTreeSet<Task>,
    pub test_set_paths: Vec<PathBuf>,
    /// Put the record's NL guidance into every input.
    pub include_nl: bool,
    /// Worker threads; 0 lets the pool decide. Does not affect output.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            noise: NoiseConfig::default(),
            hunk_gap: DEFAULT_HUNK_GAP,
            edr_cap: Some(DEFAULT_EDR_CAP),
            max_tokens_per_side: 2048,
            global_seed: 0,
            tasks_enabled: Task::ALL.into_iter().collect(),
            test_set_paths: Vec::new(),
            include_nl: true,
            workers: 0,
        }
    }
}

impl BuildConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.tasks_enabled.is_empty() {
            return Err(Error::Config("tasks_enabled is empty".into()));
        }
        if self.max_tokens_per_side < 8 {
            return Err(Error::Config("max_tokens_per_side must be at least 8".into()));
        }
        if self.hunk_gap == 0 {
            return Err(Error::Config("hunk_gap must be at least 1".into()));
        }
        if self.edr_cap == Some(0) {
            return Err(Error::Config("edr_cap must be at least 1 (or null)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub records_in: usize,
    pub records_kept: usize,
    pub records_deduped: usize,
    pub records_skipped_empty_diff: usize,
    pub records_skipped_empty_code: usize,
    pub records_skipped_oversize: usize,
    pub samples_per_task: BTreeMap<Task, usize>,
    /// Kept records for which one task produced nothing (no KEEP tokens,
    /// too many sentinels, ...).
    pub task_skips: BTreeMap<Task, usize>,
    pub total_samples: usize,
    pub mean_hunks: f64,
    pub amplification: f64,
}

impl CorpusStats {
    fn finish(&mut self, hunk_total: usize) {
        self.total_samples = self.samples_per_task.values().sum();
        let kept = self.records_kept as f64;
        if self.records_kept > 0 {
            self.mean_hunks = hunk_total as f64 / kept;
            self.amplification = self.total_samples as f64 / kept;
        } else {
            self.mean_hunks = 0.0;
            self.amplification = 0.0;
        }
    }

    pub fn records_skipped(&self) -> usize {
        self.records_skipped_empty_diff + self.records_skipped_empty_code + self.records_skipped_oversize
    }
}

/// Sidecar written next to a corpus: the statistics plus the config used.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StatsFile {
    #[serde(flatten)]
    pub stats: CorpusStats,
    pub config: BuildConfig,
}

/// `corpus.jsonl` -> `corpus.stats.json`.
pub fn stats_path(corpus: &Path) -> PathBuf {
    corpus.with_extension("stats.json")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkipReason {
    EmptyDiff,
    EmptyCode,
    Oversize,
}

/// Everything generated for one record.
#[derive(Clone, Debug, Default)]
pub struct RecordOutput {
    pub samples: Vec<TrainingSample>,
    pub skipped: Option<SkipReason>,
    pub hunks: usize,
    pub task_skips: Vec<(Task, String)>,
}

/// Generate all enabled samples for one record. Pure given `cfg`.
pub fn generate_record(record: &CorpusRecord, cfg: &BuildConfig) -> RecordOutput {
    let mut out = RecordOutput::default();
    let profile = LanguageProfile::for_language(&record.lang);
    let nl = record.nl.as_deref().filter(|_| cfg.include_nl);
    let pair = EditPair::new(&record.id, &record.old, &record.new, nl, profile);

    if pair.old_tokens.len() > cfg.max_tokens_per_side || pair.new_tokens.len() > cfg.max_tokens_per_side {
        out.skipped = Some(SkipReason::Oversize);
        return out;
    }
    if pair.old_tokens == pair.new_tokens {
        out.skipped = Some(SkipReason::EmptyDiff);
        return out;
    }
    if pair.new_tokens.is_empty() {
        out.skipped = Some(SkipReason::EmptyCode);
        return out;
    }
    let hunks = line_diff_hunks(&record.old, &record.new, cfg.hunk_gap);
    out.hunks = hunks.len();

    let seed = |task| derive_seed(cfg.global_seed, &record.id, task);
    for &task in &cfg.tasks_enabled {
        let generated = match task {
            Task::Ksm => ksm_sample(&pair, &pair.script(), &cfg.noise, seed(task)).map(|s| vec![s]),
            Task::Rm => rm_sample(&pair, &cfg.noise, seed(task)).map(|s| vec![s]),
            Task::Dae => dae_sample(&pair, &cfg.noise, seed(task)).map(|s| vec![s]),
            Task::Edr => build_path(&record.id, &record.old, &hunks, profile)
                .map(|path| edr_samples(&path, nl, cfg.edr_cap, seed(task))),
        };
        match generated {
            Ok(samples) => out.samples.extend(samples),
            Err(e) => out.task_skips.push((task, e.to_string())),
        }
    }
    out
}

/// Build into any writer. Returns the statistics; does not write a sidecar.
pub fn build_to_writer<W: Write>(records: Vec<CorpusRecord>, cfg: &BuildConfig, writer: W) -> Result<CorpusStats> {
    cfg.validate()?;
    let mut stats = CorpusStats {
        records_in: records.len(),
        ..Default::default()
    };
    for &task in &cfg.tasks_enabled {
        stats.samples_per_task.insert(task, 0);
    }
    let dedup = dedup_filter(records, &cfg.test_set_paths)?;
    stats.records_deduped = dedup.dropped.len();
    let records = dedup.kept;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let mut w = BufWriter::new(writer);
    let mut hunk_total = 0;
    for chunk in records.chunks(CHUNK) {
        let outputs: Vec<RecordOutput> =
            pool.install(|| chunk.par_iter().map(|r| generate_record(r, cfg)).collect());
        for (record, output) in chunk.iter().zip(outputs) {
            match output.skipped {
                Some(SkipReason::EmptyDiff) => stats.records_skipped_empty_diff += 1,
                Some(SkipReason::EmptyCode) => stats.records_skipped_empty_code += 1,
                Some(SkipReason::Oversize) => stats.records_skipped_oversize += 1,
                None => {
                    stats.records_kept += 1;
                    hunk_total += output.hunks;
                }
            }
            for (task, why) in &output.task_skips {
                log::debug!("record {:?}: no {task} sample: {why}", record.id);
                *stats.task_skips.entry(*task).or_default() += 1;
            }
            for sample in &output.samples {
                *stats.samples_per_task.entry(sample.task).or_default() += 1;
                serde_json::to_writer(&mut w, sample)?;
                w.write_all(b"\n").map_err(|e| Error::io("<corpus output>", e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<corpus output>", e))?;
    stats.finish(hunk_total);
    Ok(stats)
}

/// Build the corpus at `out` and its statistics sidecar at [`stats_path`].
pub fn build(records: Vec<CorpusRecord>, cfg: &BuildConfig, out: &Path) -> Result<CorpusStats> {
    let file = File::create(out).map_err(|e| Error::io(out, e))?;
    let stats = build_to_writer(records, cfg, file)?;
    let sidecar = StatsFile {
        stats: stats.clone(),
        config: cfg.clone(),
    };
    let path = stats_path(out);
    let mut json = serde_json::to_string_pretty(&sidecar)?;
    json.push('\n');
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(stats)
}

/// Recompute statistics from a corpus file.
///
/// Sample counts always come from the corpus itself. Record-level counts that
/// the corpus cannot reveal (inputs, dedup and skip counts) come from the
/// sidecar when present, and the sidecar's sample counts must agree with the
/// file. Without a sidecar every distinct id counts as one kept record and
/// the hunk count of a record is its largest EDR `t`.
pub fn stats(corpus: &Path) -> Result<CorpusStats> {
    let file = File::open(corpus).map_err(|e| Error::io(corpus, e))?;
    let mut per_task: BTreeMap<Task, usize> = BTreeMap::new();
    let mut max_t: BTreeMap<String, usize> = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(corpus, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: TrainingSample = serde_json::from_str(&line).map_err(|e| Error::Format {
            path: corpus.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        *per_task.entry(sample.task).or_default() += 1;
        let t = max_t.entry(sample.record_id).or_default();
        *t = (*t).max(sample.t_index.unwrap_or(0));
    }

    let sidecar_path = stats_path(corpus);
    if sidecar_path.exists() {
        let text = std::fs::read_to_string(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
        let sidecar: StatsFile = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: sidecar_path.clone(),
            line: 1,
            message: e.to_string(),
        })?;
        let mut s = sidecar.stats;
        let nonzero = |m: &BTreeMap<Task, usize>| -> BTreeMap<Task, usize> {
            m.iter().filter(|(_, &n)| n > 0).map(|(&t, &n)| (t, n)).collect()
        };
        if nonzero(&s.samples_per_task) != per_task {
            return Err(Error::Format {
                path: corpus.to_path_buf(),
                line: 0,
                message: "sample counts disagree with the stats sidecar".into(),
            });
        }
        for (task, n) in per_task {
            s.samples_per_task.insert(task, n);
        }
        let hunk_total = (s.mean_hunks * s.records_kept as f64).round() as usize;
        s.finish(hunk_total);
        return Ok(s);
    }

    let mut s = CorpusStats {
        records_in: max_t.len(),
        records_kept: max_t.len(),
        samples_per_task: per_task,
        ..Default::default()
    };
    s.finish(max_t.values().sum());
    Ok(s)
}
