//! Shared oracles and generators. Each test binary uses a different subset.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use divot_forge::corpus::{ingest, CorpusRecord};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn commits500() -> Vec<CorpusRecord> {
    let ingested = ingest(fixture_path("commits500.jsonl")).expect("fixture readable");
    assert!(ingested.warnings.is_empty(), "{:?}", ingested.warnings);
    ingested.records
}

/// Textbook O(nm) longest common subsequence length.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] {
                t[i - 1][j - 1] + 1
            } else {
                t[i - 1][j].max(t[i][j - 1])
            };
        }
    }
    t[a.len()][b.len()]
}

/// Minimum insert+delete edit distance.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    a.len() + b.len() - 2 * lcs_len(a, b)
}

/// All n-grams of `toks` in order, duplicates included.
fn grams<'a>(toks: &[&'a str], n: usize) -> Vec<Vec<&'a str>> {
    let mut out = Vec::new();
    if toks.len() >= n {
        for i in 0..=toks.len() - n {
            out.push(toks[i..i + n].to_vec());
        }
    }
    out
}

/// Smoothed BLEU-4 by explicit enumeration: every candidate n-gram is counted
/// by scanning both lists, with no hashing.
pub fn bleu_oracle(candidate: &str, reference: &str) -> f64 {
    let c: Vec<&str> = candidate.split_whitespace().collect();
    let r: Vec<&str> = reference.split_whitespace().collect();
    if c.is_empty() {
        return 0.0;
    }
    let mut log_p = 0.0;
    for n in 1..=4 {
        let cg = grams(&c, n);
        let rg = grams(&r, n);
        let mut seen: Vec<&Vec<&str>> = Vec::new();
        let mut matched = 0usize;
        for g in &cg {
            if seen.contains(&g) {
                continue;
            }
            seen.push(g);
            let in_c = cg.iter().filter(|x| *x == g).count();
            let in_r = rg.iter().filter(|x| *x == g).count();
            matched += in_c.min(in_r);
        }
        let p = if n == 1 {
            matched as f64 / cg.len() as f64
        } else {
            (matched as f64 + 1.0) / (cg.len() as f64 + 1.0)
        };
        if p == 0.0 {
            return 0.0;
        }
        log_p += p.ln();
    }
    let bp = if c.len() >= r.len() {
        1.0
    } else {
        (1.0 - r.len() as f64 / c.len() as f64).exp()
    };
    100.0 * bp * (log_p / 4.0).exp()
}

pub fn random_tokens(rng: &mut ChaCha8Rng, max_len: usize, alphabet: usize) -> Vec<String> {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| ((b'a' + rng.random_range(0..alphabet as u8)) as char).to_string())
        .collect()
}

fn random_line(rng: &mut ChaCha8Rng, index: usize) -> String {
    let width = rng.random_range(1..=4);
    let rhs: Vec<String> = (0..width).map(|_| format!("v{}", rng.random_range(0..20))).collect();
    format!("x{index} = {} ;", rhs.join(" + "))
}

/// A Java-ish record whose line diff has exactly `hunks` hunks at gap 3.
/// Lines are distinct, changed lines are separated by four untouched ones,
/// and only the assigned variable is renamed, so the token diff always has
/// KEEP tokens. Old code has at least 16 tokens.
pub fn synthetic_record(rng: &mut ChaCha8Rng, id: &str, hunks: usize) -> CorpusRecord {
    let tail = rng.random_range(0..4);
    let n_lines = 5 * (hunks - 1) + 4 + tail;
    let old_lines: Vec<String> = (0..n_lines).map(|i| random_line(rng, i)).collect();
    let mut new_lines = old_lines.clone();
    for h in 0..hunks {
        let line = &mut new_lines[5 * h];
        let rest = line.split_once(' ').unwrap().1.to_string();
        *line = format!("changed{h} {rest}");
    }
    let join = |v: &[String]| v.iter().map(|l| format!("{l}\n")).collect::<String>();
    CorpusRecord {
        id: id.to_string(),
        old: join(&old_lines),
        new: join(&new_lines),
        nl: Some(format!("rename in {id}")),
        lang: "java".into(),
    }
}
