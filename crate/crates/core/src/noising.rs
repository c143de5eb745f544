//! Artificial-noise sample construction and input formatting.
//!
//! Three corruptions of the old code are produced, all of which keep the new
//! code as target:
//!
//! * **KSM** masks a fraction of the tokens the edit script keeps; adjacent
//!   picks share one sentinel.
//! * **RM** masks a fixed token budget split over a small number of random
//!   spans, one sentinel per span.
//! * **DAE** replaces and deletes tokens independently and inserts stray
//!   sentinels.
//!
//! Sentinels are literal `[MASK0]`, `[MASK1]`, ... numbered left to right.

use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diff::{diff_texts, EditScript};
use crate::error::{Error, Result};
use crate::lexer::{code_tokens, LanguageProfile};
use crate::seed::rng_from_seed;

/// Sentinels available per sample (`[MASK0]` through `[MASK99]`).
pub const MAX_SENTINELS: usize = 100;

pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Ksm,
    Rm,
    Dae,
    Edr,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Ksm, Task::Rm, Task::Dae, Task::Edr];

    pub fn tag(self) -> &'static str {
        match self {
            Task::Ksm => "[KSM]",
            Task::Rm => "[RM]",
            Task::Dae => "[DAE]",
            Task::Edr => "[EDR]",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Ksm => "ksm",
            Task::Rm => "rm",
            Task::Dae => "dae",
            Task::Edr => "edr",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ksm" => Some(Task::Ksm),
            "rm" => Some(Task::Rm),
            "dae" => Some(Task::Dae),
            "edr" => Some(Task::Edr),
            _ => None,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One pre-training pair. Serializes to the corpus JSONL line format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSample {
    #[serde(rename = "id")]
    pub record_id: String,
    pub task: Task,
    pub input: String,
    pub target: String,
    #[serde(rename = "t")]
    pub t_index: Option<usize>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub ksm_rate: f64,
    pub rm_rate: f64,
    pub rm_mean_spans: f64,
    pub dae_replace: f64,
    pub dae_delete: f64,
    pub dae_insert: f64,
    pub sentinel_prefix: String,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            ksm_rate: 0.30,
            rm_rate: 0.20,
            rm_mean_spans: 2.5,
            dae_replace: 0.10,
            dae_delete: 0.05,
            dae_insert: 0.05,
            sentinel_prefix: "[MASK".into(),
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        let fractions = [
            ("ksm_rate", self.ksm_rate),
            ("rm_rate", self.rm_rate),
            ("dae_replace", self.dae_replace),
            ("dae_delete", self.dae_delete),
            ("dae_insert", self.dae_insert),
        ];
        for (name, v) in fractions {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.dae_replace + self.dae_delete > 1.0 {
            return Err(Error::Config(
                "dae_replace + dae_delete must not exceed 1".into(),
            ));
        }
        if !(self.rm_mean_spans >= 1.0 && self.rm_mean_spans.is_finite()) {
            return Err(Error::Config(format!(
                "rm_mean_spans must be >= 1, got {}",
                self.rm_mean_spans
            )));
        }
        if self.sentinel_prefix.is_empty() || self.sentinel_prefix.chars().any(char::is_whitespace) {
            return Err(Error::Config("sentinel_prefix must be a non-empty word".into()));
        }
        Ok(())
    }

    pub fn sentinel(&self, i: usize) -> String {
        format!("{}{}]", self.sentinel_prefix, i)
    }

    /// Parse `tok` as a sentinel of this config, returning its number.
    pub fn sentinel_index(&self, tok: &str) -> Option<usize> {
        tok.strip_prefix(self.sentinel_prefix.as_str())?
            .strip_suffix(']')?
            .parse()
            .ok()
    }
}

/// `round(rate * n)` with halves rounded up. The epsilon absorbs binary
/// representation error (`0.3 * 5` must give 2, not 1).
pub fn round_half_up(rate: f64, n: usize) -> usize {
    (rate * n as f64 + 0.5 + 1e-9).floor() as usize
}

/// Mask budget: `max(1, round(rate * n))`, never more than `n`.
pub fn mask_budget(rate: f64, n: usize) -> usize {
    round_half_up(rate, n).max(1).min(n)
}

/// Build a model input: `[CLS] [TASK] nl [SEP] code [SEP]`, or without the NL
/// segment when `nl` is absent or blank.
pub fn format_input(task: Task, nl: Option<&str>, code: &str) -> String {
    let nl = nl
        .map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|s| !s.is_empty());
    match nl {
        Some(nl) => format!("{CLS} {} {nl} {SEP} {code} {SEP}", task.tag()),
        None => format!("{CLS} {} {code} {SEP}", task.tag()),
    }
}

/// Old and new code of one record, lexed once and shared by every generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EditPair {
    pub record_id: String,
    pub nl: Option<String>,
    /// Non-comment tokens of the old code.
    pub old_tokens: Vec<String>,
    pub new_tokens: Vec<String>,
    /// Canonical rendering of the new code; the target of every sample.
    pub target: String,
}

impl EditPair {
    pub fn new(
        record_id: impl Into<String>,
        old: &str,
        new: &str,
        nl: Option<&str>,
        profile: &LanguageProfile,
    ) -> Self {
        let texts = |src: &str| -> Vec<String> {
            code_tokens(src, profile).into_iter().map(|t| t.text).collect()
        };
        let new_tokens = texts(new);
        EditPair {
            record_id: record_id.into(),
            nl: nl.map(str::to_string),
            old_tokens: texts(old),
            target: new_tokens.join(" "),
            new_tokens,
        }
    }

    pub fn script(&self) -> EditScript {
        diff_texts(&self.old_tokens, &self.new_tokens)
    }

    fn sample(&self, task: Task, code: &[String], seed: u64) -> TrainingSample {
        TrainingSample {
            record_id: self.record_id.clone(),
            task,
            input: format_input(task, self.nl.as_deref(), &code.join(" ")),
            target: self.target.clone(),
            t_index: None,
            seed,
        }
    }
}

/// The corrupted old-code token sequence plus bookkeeping about what was done.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corruption {
    pub code: Vec<String>,
    /// Old-token positions hidden behind a sentinel, ascending.
    pub masked: Vec<usize>,
    /// Old-token positions dropped outright (DAE only).
    pub deleted: Vec<usize>,
    /// Stray sentinels added (DAE only).
    pub inserted: usize,
    /// Distinct spans masked (RM only; equals the sentinel count there).
    pub spans: usize,
    pub sentinels: usize,
}

enum Slot {
    Token(usize),
    Sentinel,
}

/// Render slots, numbering sentinels left to right.
fn materialize(slots: &[Slot], tokens: &[String], cfg: &NoiseConfig) -> Result<(Vec<String>, usize)> {
    let mut next = 0;
    let mut code = Vec::with_capacity(slots.len());
    for slot in slots {
        match slot {
            Slot::Token(i) => code.push(tokens[*i].clone()),
            Slot::Sentinel => {
                code.push(cfg.sentinel(next));
                next += 1;
            }
        }
    }
    if next > MAX_SENTINELS {
        return Err(Error::SentinelOverflow(next));
    }
    Ok((code, next))
}

/// Keep-span masking: hide `max(1, round(ksm_rate * k))` of the `k` kept tokens.
pub fn ksm_corrupt(
    old_tokens: &[String],
    script: &EditScript,
    cfg: &NoiseConfig,
    seed: u64,
) -> Result<Corruption> {
    let keep = script.keep_positions();
    if keep.is_empty() {
        return Err(Error::NoKeep);
    }
    let m = mask_budget(cfg.ksm_rate, keep.len());
    let mut rng = rng_from_seed(seed);
    let mut masked: Vec<usize> = index::sample(&mut rng, keep.len(), m)
        .into_iter()
        .map(|i| keep[i])
        .collect();
    masked.sort_unstable();

    let mut is_masked = vec![false; old_tokens.len()];
    for &p in &masked {
        is_masked[p] = true;
    }
    let mut slots = Vec::with_capacity(old_tokens.len());
    for i in 0..old_tokens.len() {
        if !is_masked[i] {
            slots.push(Slot::Token(i));
        } else if i == 0 || !is_masked[i - 1] {
            slots.push(Slot::Sentinel);
        }
    }
    let (code, sentinels) = materialize(&slots, old_tokens, cfg)?;
    Ok(Corruption {
        code,
        masked,
        sentinels,
        spans: sentinels,
        ..Default::default()
    })
}

/// Split `total` into `n` parts differing by at most one, larger parts first.
fn split_even(total: usize, n: usize) -> Vec<usize> {
    (0..n).map(|i| total / n + usize::from(i < total % n)).collect()
}

/// Random span masking: `max(1, round(rm_rate * M))` tokens over 2 or 3 spans.
pub fn rm_corrupt(old_tokens: &[String], cfg: &NoiseConfig, seed: u64) -> Result<Corruption> {
    let total = old_tokens.len();
    if total == 0 {
        return Err(Error::EmptyCode);
    }
    let budget = mask_budget(cfg.rm_rate, total);
    let mut rng = rng_from_seed(seed);

    let whole = cfg.rm_mean_spans.floor();
    let frac = cfg.rm_mean_spans - whole;
    let mut n = whole as usize + usize::from(rng.random::<f64>() < frac);
    n = n.clamp(1, budget);

    let spans = 'placed: loop {
        let lens = split_even(budget, n);
        'attempt: for _ in 0..100 {
            let mut spans: Vec<(usize, usize)> = Vec::with_capacity(n);
            for &len in &lens {
                let start = rng.random_range(0..=total - len);
                let end = start + len;
                if spans.iter().any(|&(s, e)| start < e && s < end) {
                    continue 'attempt;
                }
                spans.push((start, end));
            }
            break 'placed spans;
        }
        // n == 1 always fits since budget <= total
        n -= 1;
    };

    let mut spans = spans;
    spans.sort_unstable();
    let mut slots = Vec::new();
    let mut masked = Vec::with_capacity(budget);
    let mut pos = 0;
    for &(s, e) in &spans {
        slots.extend((pos..s).map(Slot::Token));
        slots.push(Slot::Sentinel);
        masked.extend(s..e);
        pos = e;
    }
    slots.extend((pos..total).map(Slot::Token));
    let (code, sentinels) = materialize(&slots, old_tokens, cfg)?;
    Ok(Corruption {
        code,
        masked,
        spans: spans.len(),
        sentinels,
        ..Default::default()
    })
}

/// Denoising corruption: per-token replace/delete draws, then
/// `round(dae_insert * M)` sentinels inserted at uniform positions.
pub fn dae_corrupt(old_tokens: &[String], cfg: &NoiseConfig, seed: u64) -> Result<Corruption> {
    let total = old_tokens.len();
    if total == 0 {
        return Err(Error::EmptyCode);
    }
    let mut rng = rng_from_seed(seed);
    let mut slots = Vec::with_capacity(total);
    let mut masked = Vec::new();
    let mut deleted = Vec::new();
    for i in 0..total {
        let u: f64 = rng.random();
        if u < cfg.dae_replace {
            slots.push(Slot::Sentinel);
            masked.push(i);
        } else if u < cfg.dae_replace + cfg.dae_delete {
            deleted.push(i);
        } else {
            slots.push(Slot::Token(i));
        }
    }
    let inserted = round_half_up(cfg.dae_insert, total);
    for _ in 0..inserted {
        let at = rng.random_range(0..=slots.len());
        slots.insert(at, Slot::Sentinel);
    }
    let mut inserted_total = inserted;
    if slots.is_empty() {
        // Everything deleted: a lone sentinel keeps the input non-empty.
        slots.push(Slot::Sentinel);
        inserted_total += 1;
    }
    let (code, sentinels) = materialize(&slots, old_tokens, cfg)?;
    Ok(Corruption {
        code,
        masked,
        deleted,
        inserted: inserted_total,
        sentinels,
        spans: 0,
    })
}

pub fn ksm_sample(
    pair: &EditPair,
    script: &EditScript,
    cfg: &NoiseConfig,
    seed: u64,
) -> Result<TrainingSample> {
    let c = ksm_corrupt(&pair.old_tokens, script, cfg, seed)?;
    Ok(pair.sample(Task::Ksm, &c.code, seed))
}

pub fn rm_sample(pair: &EditPair, cfg: &NoiseConfig, seed: u64) -> Result<TrainingSample> {
    let c = rm_corrupt(&pair.old_tokens, cfg, seed)?;
    Ok(pair.sample(Task::Rm, &c.code, seed))
}

pub fn dae_sample(pair: &EditPair, cfg: &NoiseConfig, seed: u64) -> Result<TrainingSample> {
    let c = dae_corrupt(&pair.old_tokens, cfg, seed)?;
    Ok(pair.sample(Task::Dae, &c.code, seed))
}

/// Code segment of a formatted input (between the last two `[SEP]`s, or after
/// the task tag when there is no NL segment).
pub fn input_code(input: &str) -> Option<&str> {
    let body = input.strip_prefix(CLS)?.trim_start();
    let body = Task::ALL
        .iter()
        .find_map(|t| body.strip_prefix(t.tag()))?
        .trim_start();
    let body = body.strip_suffix(SEP)?.trim_end();
    Some(match body.rfind(&format!(" {SEP} ")) {
        Some(i) => &body[i + SEP.len() + 2..],
        None => body,
    })
}
