//! Edit-quality metrics: exact match, smoothed BLEU-4, SARI and a partial
//! CodeBLEU made of its two n-gram components.
//!
//! All metrics tokenize on whitespace. BLEU uses add-one smoothing for n >= 2
//! and is sentence level unless corpus aggregation is requested. SARI works
//! on n-gram sets and scores an empty ratio (0/0) as 1.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::Hash;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexer::{normalize_for_match, LanguageProfile};

pub const MAX_ORDER: usize = 4;
pub const DEFAULT_KEYWORD_WEIGHT: f64 = 4.0;

pub fn exact_match(candidate: &str, reference: &str, normalize: bool, profile: &LanguageProfile) -> bool {
    if normalize {
        normalize_for_match(candidate, profile) == normalize_for_match(reference, profile)
    } else {
        candidate == reference
    }
}

fn ngram_counts<'a, 'b>(tokens: &'a [&'b str], n: usize) -> HashMap<&'a [&'b str], usize> {
    let mut counts = HashMap::new();
    if n > 0 {
        for g in tokens.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram statistics of one candidate against one reference.
/// Unigrams are weighted per candidate token; higher orders count 1 each.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BleuStats {
    pub matches: [f64; MAX_ORDER],
    pub totals: [f64; MAX_ORDER],
    pub candidate_len: usize,
    pub reference_len: usize,
}

impl BleuStats {
    pub fn new(candidate: &[&str], reference: &[&str], unigram_weight: impl Fn(&str) -> f64) -> Self {
        let mut s = BleuStats {
            candidate_len: candidate.len(),
            reference_len: reference.len(),
            ..Default::default()
        };
        for n in 1..=MAX_ORDER {
            let refs = ngram_counts(reference, n);
            for (gram, count) in ngram_counts(candidate, n) {
                let w = if n == 1 { unigram_weight(gram[0]) } else { 1.0 };
                let clipped = count.min(refs.get(gram).copied().unwrap_or(0));
                s.matches[n - 1] += w * clipped as f64;
                s.totals[n - 1] += w * count as f64;
            }
        }
        s
    }

    fn add(&mut self, other: &BleuStats) {
        for n in 0..MAX_ORDER {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.candidate_len += other.candidate_len;
        self.reference_len += other.reference_len;
    }

    /// BLEU in `[0, 1]`.
    pub fn score(&self) -> f64 {
        if self.candidate_len == 0 || self.totals[0] == 0.0 {
            return 0.0;
        }
        let p1 = self.matches[0] / self.totals[0];
        if p1 == 0.0 {
            return 0.0;
        }
        let mut log_sum = p1.ln();
        for n in 1..MAX_ORDER {
            log_sum += ((self.matches[n] + 1.0) / (self.totals[n] + 1.0)).ln();
        }
        let (c, r) = (self.candidate_len as f64, self.reference_len as f64);
        let bp = if c >= r { 1.0 } else { (1.0 - r / c).exp() };
        bp * (log_sum / MAX_ORDER as f64).exp()
    }
}

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Smoothed sentence BLEU-4 in `[0, 100]`.
pub fn bleu4(candidate: &str, reference: &str) -> f64 {
    100.0 * BleuStats::new(&words(candidate), &words(reference), |_| 1.0).score()
}

/// Corpus BLEU-4 in `[0, 100]`: n-gram counts are pooled before smoothing.
pub fn corpus_bleu4<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> f64 {
    let mut total = BleuStats::default();
    for (c, r) in pairs {
        total.add(&BleuStats::new(&words(c), &words(r), |_| 1.0));
    }
    100.0 * total.score()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SariScore {
    pub value: f64,
    pub add_f1: f64,
    pub keep_f1: f64,
    pub del_precision: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn set_f1<T: Eq + Hash>(system: &HashSet<T>, gold: &HashSet<T>) -> f64 {
    let hit = system.intersection(gold).count();
    f1(ratio(hit, system.len()), ratio(hit, gold.len()))
}

pub fn sari(source: &str, candidate: &str, reference: &str) -> SariScore {
    let (s, c, r) = (words(source), words(candidate), words(reference));
    let mut out = SariScore::default();
    for n in 1..=MAX_ORDER {
        let set = |t: &[&str]| -> HashSet<Vec<String>> {
            t.windows(n).map(|g| g.iter().map(|x| x.to_string()).collect()).collect()
        };
        let (s, c, r) = (set(&s), set(&c), set(&r));
        let diff = |a: &HashSet<Vec<String>>, b: &HashSet<Vec<String>>| -> HashSet<Vec<String>> {
            a.difference(b).cloned().collect()
        };
        let inter = |a: &HashSet<Vec<String>>, b: &HashSet<Vec<String>>| -> HashSet<Vec<String>> {
            a.intersection(b).cloned().collect()
        };
        out.add_f1 += set_f1(&diff(&c, &s), &diff(&r, &s));
        out.keep_f1 += set_f1(&inter(&c, &s), &inter(&r, &s));
        let (sys_del, gold_del) = (diff(&s, &c), diff(&s, &r));
        out.del_precision += ratio(sys_del.intersection(&gold_del).count(), sys_del.len());
    }
    let k = MAX_ORDER as f64;
    out.add_f1 /= k;
    out.keep_f1 /= k;
    out.del_precision /= k;
    out.value = (out.add_f1 + out.keep_f1 + out.del_precision) / 3.0;
    out
}

/// `(alpha, beta, gamma, delta)` for BLEU, keyword-weighted BLEU, AST match
/// and dataflow match.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuWeights {
    pub bleu: f64,
    pub weighted_bleu: f64,
    pub ast_match: f64,
    pub dataflow_match: f64,
}

impl Default for CodeBleuWeights {
    fn default() -> Self {
        CodeBleuWeights {
            bleu: 0.25,
            weighted_bleu: 0.25,
            ast_match: 0.25,
            dataflow_match: 0.25,
        }
    }
}

impl CodeBleuWeights {
    pub fn new(bleu: f64, weighted_bleu: f64, ast_match: f64, dataflow_match: f64) -> Result<Self> {
        let w = CodeBleuWeights {
            bleu,
            weighted_bleu,
            ast_match,
            dataflow_match,
        };
        if [bleu, weighted_bleu, ast_match, dataflow_match]
            .iter()
            .any(|x| !x.is_finite() || *x < 0.0)
        {
            return Err(Error::Config(format!("codebleu weights must be finite and nonnegative: {w:?}")));
        }
        Ok(w)
    }

    /// Weights actually applied. AST and dataflow matching are not
    /// implemented, so their share is spread proportionally over the two BLEU
    /// components (evenly if both of those are zero).
    pub fn effective(&self) -> (f64, f64) {
        let avail = self.bleu + self.weighted_bleu;
        if avail > 0.0 {
            (self.bleu / avail, self.weighted_bleu / avail)
        } else {
            (0.5, 0.5)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeBleuScore {
    pub value: f64,
    pub components: BTreeMap<String, f64>,
    pub weights: CodeBleuWeights,
    pub weights_used: BTreeMap<String, f64>,
    pub absent: Vec<String>,
}

fn codebleu_parts(candidate: &str, reference: &str, profile: &LanguageProfile, keyword_weight: f64) -> (f64, f64) {
    let (c, r) = (words(candidate), words(reference));
    let bleu = bleu4(candidate, reference) / 100.0;
    let weighted = BleuStats::new(&c, &r, |t| if profile.is_keyword(t) { keyword_weight } else { 1.0 }).score();
    (bleu, weighted)
}

fn combine(bleu: f64, weighted: f64, weights: CodeBleuWeights) -> CodeBleuScore {
    let (wb, ww) = weights.effective();
    CodeBleuScore {
        value: wb * bleu + ww * weighted,
        components: [("bleu".to_string(), bleu), ("weighted_bleu".to_string(), weighted)].into(),
        weights,
        weights_used: [("bleu".to_string(), wb), ("weighted_bleu".to_string(), ww)].into(),
        absent: vec!["ast_match".into(), "dataflow_match".into()],
    }
}

/// Partial CodeBLEU in `[0, 1]` with the default keyword weight.
pub fn codebleu(candidate: &str, reference: &str, profile: &LanguageProfile, weights: CodeBleuWeights) -> CodeBleuScore {
    codebleu_with(candidate, reference, profile, weights, DEFAULT_KEYWORD_WEIGHT)
}

pub fn codebleu_with(
    candidate: &str,
    reference: &str,
    profile: &LanguageProfile,
    weights: CodeBleuWeights,
    keyword_weight: f64,
) -> CodeBleuScore {
    let (b, w) = codebleu_parts(candidate, reference, profile, keyword_weight);
    combine(b, w, weights)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Em,
    Bleu,
    Sari,
    Codebleu,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Em, Metric::Bleu, Metric::Sari, Metric::Codebleu];
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Em => "em",
            Metric::Bleu => "bleu",
            Metric::Sari => "sari",
            Metric::Codebleu => "codebleu",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "em" => Ok(Metric::Em),
            "bleu" | "bleu4" => Ok(Metric::Bleu),
            "sari" => Ok(Metric::Sari),
            "codebleu" => Ok(Metric::Codebleu),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScoreOptions {
    /// Compare after `normalize_for_match` instead of raw lines.
    pub normalize: bool,
    /// `None` means every metric the inputs allow (SARI needs sources).
    pub metrics: Option<BTreeSet<Metric>>,
    pub corpus_bleu: bool,
    pub profile: LanguageProfile,
    pub weights: CodeBleuWeights,
    pub keyword_weight: f64,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            normalize: false,
            metrics: None,
            corpus_bleu: false,
            profile: LanguageProfile::generic().clone(),
            weights: CodeBleuWeights::default(),
            keyword_weight: DEFAULT_KEYWORD_WEIGHT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreReport {
    pub n_examples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub em: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bleu4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bleu_aggregation: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sari: Option<SariScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codebleu: Option<CodeBleuScore>,
}

#[derive(Default)]
struct LineScore {
    em: f64,
    bleu: f64,
    sari: SariScore,
    cb_bleu: f64,
    cb_weighted: f64,
}

/// Score line-aligned candidates against references (and sources for SARI).
pub fn score_lines(pred: &[String], gold: &[String], src: Option<&[String]>, opts: &ScoreOptions) -> Result<ScoreReport> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left_name: "pred".into(),
            left: pred.len(),
            right_name: "gold".into(),
            right: gold.len(),
        });
    }
    if let Some(src) = src {
        if src.len() != gold.len() {
            return Err(Error::LengthMismatch {
                left_name: "src".into(),
                left: src.len(),
                right_name: "gold".into(),
                right: gold.len(),
            });
        }
    }
    let metrics = match &opts.metrics {
        Some(m) if m.is_empty() => return Err(Error::Config("no metrics selected".into())),
        Some(m) => m.clone(),
        None => Metric::ALL
            .into_iter()
            .filter(|m| *m != Metric::Sari || src.is_some())
            .collect(),
    };
    if metrics.contains(&Metric::Sari) && src.is_none() {
        return Err(Error::Config("sari needs a source file".into()));
    }
    opts.weights.validate()?;

    let prep = |s: &str| -> String {
        if opts.normalize {
            normalize_for_match(s, &opts.profile)
        } else {
            s.to_string()
        }
    };
    let n = pred.len();
    let prepared: Vec<(String, String, Option<String>)> = (0..n)
        .into_par_iter()
        .map(|i| (prep(&pred[i]), prep(&gold[i]), src.map(|s| prep(&s[i]))))
        .collect();

    let per_line: Vec<LineScore> = prepared
        .par_iter()
        .map(|(p, g, s)| {
            let mut ls = LineScore::default();
            if metrics.contains(&Metric::Em) {
                ls.em = if p == g { 1.0 } else { 0.0 };
            }
            if metrics.contains(&Metric::Bleu) && !opts.corpus_bleu {
                ls.bleu = bleu4(p, g);
            }
            if let (true, Some(s)) = (metrics.contains(&Metric::Sari), s) {
                ls.sari = sari(s, p, g);
            }
            if metrics.contains(&Metric::Codebleu) {
                (ls.cb_bleu, ls.cb_weighted) = codebleu_parts(p, g, &opts.profile, opts.keyword_weight);
            }
            ls
        })
        .collect();

    let mean = |f: &dyn Fn(&LineScore) -> f64| -> f64 {
        if n == 0 {
            0.0
        } else {
            per_line.iter().map(f).sum::<f64>() / n as f64
        }
    };
    let has = |m| metrics.contains(&m);
    let sari = has(Metric::Sari).then(|| {
        let add_f1 = mean(&|l| l.sari.add_f1);
        let keep_f1 = mean(&|l| l.sari.keep_f1);
        let del_precision = mean(&|l| l.sari.del_precision);
        SariScore {
            value: (add_f1 + keep_f1 + del_precision) / 3.0,
            add_f1,
            keep_f1,
            del_precision,
        }
    });
    let bleu4 = has(Metric::Bleu).then(|| {
        if opts.corpus_bleu {
            corpus_bleu4(prepared.iter().map(|(p, g, _)| (p.as_str(), g.as_str())))
        } else {
            mean(&|l| l.bleu)
        }
    });
    Ok(ScoreReport {
        n_examples: n,
        em: has(Metric::Em).then(|| mean(&|l| l.em)),
        bleu4,
        bleu_aggregation: has(Metric::Bleu).then_some(if opts.corpus_bleu { "corpus" } else { "sentence" }),
        sari,
        codebleu: has(Metric::Codebleu)
            .then(|| combine(mean(&|l| l.cb_bleu), mean(&|l| l.cb_weighted), opts.weights)),
    })
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l).to_string()).collect())
}

pub fn score_files(pred: &Path, gold: &Path, src: Option<&Path>, opts: &ScoreOptions) -> Result<ScoreReport> {
    let p = read_lines(pred)?;
    let g = read_lines(gold)?;
    let s = src.map(read_lines).transpose()?;
    score_lines(&p, &g, s.as_deref(), opts)
}

impl CodeBleuWeights {
    fn validate(&self) -> Result<()> {
        CodeBleuWeights::new(self.bleu, self.weighted_bleu, self.ast_match, self.dataflow_match).map(|_| ())
    }
}
