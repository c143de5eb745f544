//! Diff-based code-edit pre-training data.
//!
//! Given pairs of old and new code, this crate lexes them, computes token and
//! line diffs, builds the chain of partially edited states between them, and
//! emits four kinds of denoising samples:
//!
//! - **KSM** masks part of the tokens the edit keeps,
//! - **RM** masks random spans of the old code,
//! - **DAE** replaces, deletes and inserts tokens at random,
//! - **EDR** pairs every intermediate state with the final code.
//!
//! It also scores model output with exact match, BLEU-4, SARI and a partial
//! CodeBLEU.
//!
//! ```
//! use divot_forge::{build_path, line_diff_hunks, LanguageProfile};
//!
//! let old = "Ca\n\n\n\nDa\n\n\n\nEa\n";
//! let new = "Cb\n\n\n\nDb\n\n\n\nEb\n";
//! let hunks = line_diff_hunks(old, new, 3);
//! let path = build_path("demo", old, &hunks, LanguageProfile::generic()).unwrap();
//! assert_eq!(path.states, ["Ca Da Ea", "Cb Da Ea", "Cb Db Ea", "Cb Db Eb"]);
//! ```

pub mod cli;
pub mod corpus;
pub mod diff;
pub mod error;
pub mod evolution;
pub mod lexer;
pub mod metrics;
pub mod noising;
pub mod seed;

pub use corpus::{build, dedup_filter, ingest, stats, BuildConfig, CorpusRecord, CorpusStats};
pub use diff::{apply_hunks, apply_script, diff_texts, line_diff_hunks, token_diff, EditKind, EditOp, EditScript, Hunk};
pub use error::{Error, Result};
pub use evolution::{build_path, edr_samples, edr_steps, EvolutionPath};
pub use lexer::{canonical, normalize_for_match, render, tokenize, LanguageProfile, Token, TokenKind};
pub use metrics::{bleu4, codebleu, exact_match, sari, score_files, CodeBleuWeights, ScoreOptions, ScoreReport};
pub use noising::{
    dae_corrupt, dae_sample, format_input, ksm_corrupt, ksm_sample, rm_corrupt, rm_sample, EditPair, NoiseConfig,
    Task, TrainingSample,
};
pub use seed::derive_seed;
