//! Evolution paths: the chain of partially edited states between old and new code.
//!
//! A record whose line diff has `T` hunks yields states `X_T` (old code)
//! through `X_0` (new code). `X_{T-k}` is the old code with its first `k`
//! hunks applied, hunks taken in file order. Each intermediate state still
//! carries `t` unapplied hunks and is paired with `X_0` as an EDR sample.

use serde::Serialize;

use crate::diff::{apply_hunks, Hunk};
use crate::error::{Error, Result};
use crate::lexer::{canonical, LanguageProfile};
use crate::noising::{format_input, Task, TrainingSample};

/// Default number of EDR intermediates kept per record.
pub const DEFAULT_EDR_CAP: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvolutionPath {
    pub record_id: String,
    /// Canonical renderings `[X_T, X_{T-1}, ..., X_0]`.
    pub states: Vec<String>,
    /// The same states as raw text (line endings normalised).
    #[serde(skip)]
    pub raw_states: Vec<String>,
    pub hunks: Vec<Hunk>,
}

impl EvolutionPath {
    /// `T`, the number of hunks.
    pub fn hunk_count(&self) -> usize {
        self.hunks.len()
    }

    /// Canonical `X_t` for `0 <= t <= T`.
    pub fn state(&self, t: usize) -> &str {
        &self.states[self.hunk_count() - t]
    }

    pub fn old_code(&self) -> &str {
        &self.states[0]
    }

    pub fn new_code(&self) -> &str {
        self.states.last().expect("a path has at least two states")
    }
}

/// Build `X_T .. X_0` from `hunks`, which must come from
/// `line_diff_hunks(old_text, new_text, _)`.
pub fn build_path(
    record_id: &str,
    old_text: &str,
    hunks: &[Hunk],
    profile: &LanguageProfile,
) -> Result<EvolutionPath> {
    if hunks.is_empty() {
        return Err(Error::EmptyDiff);
    }
    let raw_states: Vec<String> = (0..=hunks.len())
        .map(|k| apply_hunks(old_text, hunks, k))
        .collect();
    let states = raw_states.iter().map(|s| canonical(s, profile)).collect();
    Ok(EvolutionPath {
        record_id: record_id.to_string(),
        states,
        raw_states,
        hunks: hunks.to_vec(),
    })
}

/// The `t` values kept for a path with `hunk_count` hunks under `cap`,
/// ascending. All of `1..=T` when `cap` is `None` or at least `T`; otherwise
/// `cap` evenly spaced values that always include `T`.
pub fn edr_steps(hunk_count: usize, cap: Option<usize>) -> Vec<usize> {
    let t = hunk_count;
    match cap {
        Some(cap) if cap < t => {
            if cap == 0 {
                return Vec::new();
            }
            if cap == 1 {
                return vec![t];
            }
            let mut steps: Vec<usize> = (0..cap).map(|i| t - i * (t - 1) / (cap - 1)).collect();
            steps.reverse();
            steps
        }
        _ => (1..=t).collect(),
    }
}

/// One `<X_t, X_0>` sample per selected `t`, in ascending `t`.
pub fn edr_samples(
    path: &EvolutionPath,
    nl: Option<&str>,
    cap: Option<usize>,
    seed: u64,
) -> Vec<TrainingSample> {
    edr_steps(path.hunk_count(), cap)
        .into_iter()
        .map(|t| TrainingSample {
            record_id: path.record_id.clone(),
            task: Task::Edr,
            input: format_input(Task::Edr, nl, path.state(t)),
            target: path.new_code().to_string(),
            t_index: Some(t),
            seed,
        })
        .collect()
}
