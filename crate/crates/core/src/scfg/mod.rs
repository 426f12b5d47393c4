//! Synchronous context-free grammars.
//!
//! A rule `NT -> (source, target, alignment)` rewrites a nonterminal on the
//! utterance and logical-form sides at once; aligned nonterminal occurrences
//! are expanded by the same sub-derivation. Grammars are read from a
//! line-oriented text format:
//!
//! ```text
//! # comment
//! start ROOT
//! ROOT -> src: show <COL:1> where <COND:2> ;; tgt: ( select <COL:1> <COND:2> )
//! lexicon $victim = oil tanker | "oil tanker"
//! abstract $loc $dat
//! ```
//!
//! Nonterminals are written `<NAME:i>`, where `i` links the two occurrences
//! of an aligned pair. `start` defaults to `ROOT`.

mod bind;
mod derive;
mod grammar;
mod uat;

pub use bind::{bind_variables, BindMode, BoundPair};
pub use derive::{
    count_derivations, derive_exhaustive, derive_sample, Derivation, DerivedPair,
    ExhaustiveDerivations, DEFAULT_MAX_DEPTH, SAMPLE_RETRIES,
};
pub use grammar::{LexEntry, ScfgGrammar, ScfgRule, Symbol, DEFAULT_START};
pub use uat::uat_subsample;

use crate::lf::LfError;

/// A 31-rule grammar over maritime incident reports whose targets are SQL
/// queries written as trees.
pub const MARITIME_GRAMMAR: &str = include_str!("../../data/maritime.scfg");

#[derive(Debug, thiserror::Error)]
pub enum GrammarError {
    #[error("rule for {head}: source and target nonterminals are not a one-to-one alignment")]
    AlignmentMismatch { head: String },
    #[error("rule for {head} references {name}, which has no rules")]
    UnknownNonterminal { head: String, name: String },
    #[error("start symbol {0} has no rules")]
    UnreachableStart(String),
    #[error("variable {0} is declared both abstract and lexical")]
    AbstractLexicalOverlap(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("no derivation fits within depth {max_depth}")]
    DepthExceeded { max_depth: usize },
    #[error("variable {0} has no lexicon entry and is not abstract")]
    UnknownVariable(String),
    #[error("derived target `{text}` is not a logical form: {source}")]
    InvalidLf { text: String, source: LfError },
}
