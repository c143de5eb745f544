//! Minimal edit scripts between token sequences, and line-level hunks.
//!
//! Both levels share one LCS engine: Myers' greedy O(ND) search, with a
//! quadratic dynamic program as fallback once the edit distance exceeds
//! [`MYERS_BAND`]. Either route yields a shortest insert/delete script; the
//! result is then canonicalised so that inside every changed region all
//! deletions precede all insertions.

use serde::Serialize;

use crate::error::{Error, Result};
pub use crate::lexer::normalize_line_endings;
use crate::lexer::Token;

/// Edit distance beyond which the Myers trace is abandoned for the DP table.
pub const MYERS_BAND: usize = 512;

/// Default number of unchanged lines that separates two hunks.
pub const DEFAULT_HUNK_GAP: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Keep,
    Insert,
    Delete,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EditOp {
    pub kind: EditKind,
    pub tokens: Vec<String>,
}

/// A coalesced KEEP/INSERT/DELETE program turning `old_len` tokens into `new_len` tokens.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
    pub old_len: usize,
    pub new_len: usize,
}

impl EditScript {
    fn push(&mut self, kind: EditKind, token: &str) {
        match self.ops.last_mut() {
            Some(op) if op.kind == kind => op.tokens.push(token.to_string()),
            _ => self.ops.push(EditOp {
                kind,
                tokens: vec![token.to_string()],
            }),
        }
    }

    fn count(&self, kind: EditKind) -> usize {
        self.ops
            .iter()
            .filter(|op| op.kind == kind)
            .map(|op| op.tokens.len())
            .sum()
    }

    /// Number of inserted plus deleted tokens.
    pub fn cost(&self) -> usize {
        self.count(EditKind::Insert) + self.count(EditKind::Delete)
    }

    pub fn keep_count(&self) -> usize {
        self.count(EditKind::Keep)
    }

    pub fn is_identity(&self) -> bool {
        self.cost() == 0
    }

    /// Indices into the old sequence of every token the script keeps.
    pub fn keep_positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.keep_count());
        let mut pos = 0;
        for op in &self.ops {
            match op.kind {
                EditKind::Keep => {
                    out.extend(pos..pos + op.tokens.len());
                    pos += op.tokens.len();
                }
                EditKind::Delete => pos += op.tokens.len(),
                EditKind::Insert => {}
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    Keep,
    Delete,
    Insert,
}

/// Shortest edit path between `a` and `b` as unit steps, in order.
fn shortest_steps<T: PartialEq>(a: &[T], b: &[T]) -> Vec<Step> {
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let (a_rest, b_rest) = (&a[prefix..], &b[prefix..]);
    let suffix = a_rest
        .iter()
        .rev()
        .zip(b_rest.iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    let a_mid = &a_rest[..a_rest.len() - suffix];
    let b_mid = &b_rest[..b_rest.len() - suffix];

    let mut steps = vec![Step::Keep; prefix];
    match myers(a_mid, b_mid, MYERS_BAND) {
        Some(mid) => steps.extend(mid),
        None => steps.extend(lcs_table(a_mid, b_mid)),
    }
    steps.extend(std::iter::repeat_n(Step::Keep, suffix));
    steps
}

/// Myers greedy search with a stored trace. Gives up (returns `None`) once the
/// edit distance exceeds `band`.
fn myers<T: PartialEq>(a: &[T], b: &[T], band: usize) -> Option<Vec<Step>> {
    let n = a.len() as isize;
    let m = b.len() as isize;
    let max = (n + m) as usize;
    let offset = max as isize + 1;
    let mut v = vec![0isize; 2 * max + 3];
    // trace[d] holds v[k] for k in -d..=d after round d, at index k + d.
    let mut trace: Vec<Vec<isize>> = Vec::new();

    for d in 0..=max as isize {
        if d as usize > band {
            return None;
        }
        let mut k = -d;
        while k <= d {
            let idx = (k + offset) as usize;
            let mut x = if k == -d || (k != d && v[idx - 1] < v[idx + 1]) {
                v[idx + 1]
            } else {
                v[idx - 1] + 1
            };
            let mut y = x - k;
            while x < n && y < m && a[x as usize] == b[y as usize] {
                x += 1;
                y += 1;
            }
            v[idx] = x;
            if x >= n && y >= m {
                trace.push(v[(offset - d) as usize..=(offset + d) as usize].to_vec());
                return Some(backtrack(&trace, n, m));
            }
            k += 2;
        }
        trace.push(v[(offset - d) as usize..=(offset + d) as usize].to_vec());
    }
    unreachable!("a path of length n + m always exists")
}

fn backtrack(trace: &[Vec<isize>], n: isize, m: isize) -> Vec<Step> {
    let mut steps = Vec::new();
    let (mut x, mut y) = (n, m);
    for d in (1..trace.len() as isize).rev() {
        let prev = &trace[(d - 1) as usize];
        let at = |k: isize| prev[(k + d - 1) as usize];
        let k = x - y;
        let down = k == -d || (k != d && at(k - 1) < at(k + 1));
        let prev_k = if down { k + 1 } else { k - 1 };
        let prev_x = at(prev_k);
        let prev_y = prev_x - prev_k;
        let (mid_x, mid_y) = if down { (prev_x, prev_y + 1) } else { (prev_x + 1, prev_y) };
        while x > mid_x && y > mid_y {
            steps.push(Step::Keep);
            x -= 1;
            y -= 1;
        }
        steps.push(if down { Step::Insert } else { Step::Delete });
        x = prev_x;
        y = prev_y;
    }
    while x > 0 && y > 0 {
        steps.push(Step::Keep);
        x -= 1;
        y -= 1;
    }
    debug_assert!(x == 0 && y == 0);
    steps.reverse();
    steps
}

/// Classic suffix-LCS table walk; O(nm) time and memory.
fn lcs_table<T: PartialEq>(a: &[T], b: &[T]) -> Vec<Step> {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut len = vec![0u32; (n + 1) * w];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            len[i * w + j] = if a[i] == b[j] {
                len[(i + 1) * w + j + 1] + 1
            } else {
                len[(i + 1) * w + j].max(len[i * w + j + 1])
            };
        }
    }
    let mut steps = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if a[i] == b[j] {
            steps.push(Step::Keep);
            i += 1;
            j += 1;
        } else if len[(i + 1) * w + j] >= len[i * w + j + 1] {
            steps.push(Step::Delete);
            i += 1;
        } else {
            steps.push(Step::Insert);
            j += 1;
        }
    }
    steps.extend(std::iter::repeat_n(Step::Delete, n - i));
    steps.extend(std::iter::repeat_n(Step::Insert, m - j));
    steps
}

/// A maximal changed region: old `a.0..a.1` replaced by new `b.0..b.1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Change {
    old: (usize, usize),
    new: (usize, usize),
}

/// Changed regions of the shortest path, in order.
fn changes<T: PartialEq>(a: &[T], b: &[T]) -> Vec<Change> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut open: Option<Change> = None;
    for step in shortest_steps(a, b) {
        match step {
            Step::Keep => {
                out.extend(open.take());
                i += 1;
                j += 1;
            }
            Step::Delete | Step::Insert => {
                let c = open.get_or_insert(Change {
                    old: (i, i),
                    new: (j, j),
                });
                if step == Step::Delete {
                    i += 1;
                    c.old.1 = i;
                } else {
                    j += 1;
                    c.new.1 = j;
                }
            }
        }
    }
    out.extend(open);
    out
}

/// Shortest edit script between two sequences of token texts.
///
/// Inside each changed region the script deletes before it inserts, so equal
/// inputs always produce byte-identical scripts.
pub fn diff_texts<S: AsRef<str>>(old: &[S], new: &[S]) -> EditScript {
    let a: Vec<&str> = old.iter().map(AsRef::as_ref).collect();
    let b: Vec<&str> = new.iter().map(AsRef::as_ref).collect();
    let mut script = EditScript {
        ops: Vec::new(),
        old_len: a.len(),
        new_len: b.len(),
    };
    let (mut i, mut j) = (0, 0);
    for c in changes(&a, &b) {
        for tok in &a[i..c.old.0] {
            script.push(EditKind::Keep, tok);
        }
        for tok in &a[c.old.0..c.old.1] {
            script.push(EditKind::Delete, tok);
        }
        for tok in &b[c.new.0..c.new.1] {
            script.push(EditKind::Insert, tok);
        }
        i = c.old.1;
        j = c.new.1;
    }
    debug_assert_eq!(a.len() - i, b.len() - j);
    for tok in &a[i..] {
        script.push(EditKind::Keep, tok);
    }
    script
}

pub fn token_diff(old: &[Token], new: &[Token]) -> EditScript {
    let a: Vec<&str> = old.iter().map(|t| t.text.as_str()).collect();
    let b: Vec<&str> = new.iter().map(|t| t.text.as_str()).collect();
    diff_texts(&a, &b)
}

/// Replay `script` over `old`, checking every Keep/Delete against it.
pub fn apply_script<S: AsRef<str>>(old: &[S], script: &EditScript) -> Result<Vec<String>> {
    let mut out = Vec::with_capacity(script.new_len);
    let mut pos = 0;
    for op in &script.ops {
        for tok in &op.tokens {
            match op.kind {
                EditKind::Insert => out.push(tok.clone()),
                EditKind::Keep | EditKind::Delete => {
                    let found = old.get(pos).map(AsRef::as_ref);
                    if found != Some(tok.as_str()) {
                        return Err(Error::Mismatch {
                            position: pos,
                            expected: tok.clone(),
                            found: found.map(str::to_string),
                        });
                    }
                    if op.kind == EditKind::Keep {
                        out.push(tok.clone());
                    }
                    pos += 1;
                }
            }
        }
    }
    if pos != old.len() || script.old_len != old.len() {
        return Err(Error::Mismatch {
            position: pos,
            expected: format!("end of script after {} tokens", script.old_len),
            found: old.get(pos).map(|s| s.as_ref().to_string()),
        });
    }
    Ok(out)
}

/// A positional group of changed lines. Ranges are half-open, 0-based line
/// indices; `replacement` holds the new-side lines with their terminators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Hunk {
    #[serde(skip)]
    pub index: usize,
    pub old_lines: (usize, usize),
    pub new_lines: (usize, usize),
    #[serde(skip)]
    pub replacement: Vec<String>,
}

/// Lines including their `\n`; the last line may lack one.
pub fn split_lines(text: &str) -> Vec<&str> {
    text.split_inclusive('\n').collect()
}

/// Group changed lines into hunks. Changes separated by fewer than `gap`
/// unchanged lines share a hunk. A `gap` of zero is treated as one.
pub fn line_diff_hunks(old_text: &str, new_text: &str, gap: usize) -> Vec<Hunk> {
    let gap = gap.max(1);
    let old_text = normalize_line_endings(old_text);
    let new_text = normalize_line_endings(new_text);
    let old = split_lines(&old_text);
    let new = split_lines(&new_text);

    let mut groups: Vec<Change> = Vec::new();
    for c in changes(&old, &new) {
        match groups.last_mut() {
            Some(last) if c.old.0 - last.old.1 < gap => {
                last.old.1 = c.old.1;
                last.new.1 = c.new.1;
            }
            _ => groups.push(c),
        }
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(i, g)| Hunk {
            index: i + 1,
            old_lines: g.old,
            new_lines: g.new,
            replacement: new[g.new.0..g.new.1].iter().map(|s| s.to_string()).collect(),
        })
        .collect()
}

/// `old_text` with the first `count` hunks applied (all of them when `count`
/// exceeds the hunk count). Line endings are normalised first.
pub fn apply_hunks(old_text: &str, hunks: &[Hunk], count: usize) -> String {
    let old_text = normalize_line_endings(old_text);
    let old = split_lines(&old_text);
    let mut out = String::with_capacity(old_text.len());
    let mut line = 0;
    for hunk in hunks.iter().take(count) {
        for l in &old[line..hunk.old_lines.0] {
            out.push_str(l);
        }
        for l in &hunk.replacement {
            out.push_str(l);
        }
        line = hunk.old_lines.1;
    }
    for l in &old[line..] {
        out.push_str(l);
    }
    out
}
