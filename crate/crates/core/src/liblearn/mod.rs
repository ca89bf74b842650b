//! Abstraction mining over solved programs, corpus rewriting and expansion.
//!
//! The miner searches top down from a single hole, refining one hole at a
//! time with rules that occur at two or more matched sites, and scores a
//! finished pattern by `(occurrences - 1) * (concrete_size - 1)` with
//! occurrences counted greedily without overlap.

mod library;
mod miner;
mod rewrite;

pub use library::{format_library, load_library};
pub use miner::{learn_library, mine_abstractions, utility, LibraryRound, Mined, MinerLimits};
pub use rewrite::{
    canonical_body, expand_abstractions, expand_node, find_occurrences, match_body, rewrite_corpus,
    rewrite_program, rewrite_with, substitute, Occurrence,
};
