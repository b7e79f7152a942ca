//! Lexicon construction and disclosure scoring for human-capital text.
//!
//! The pipeline mirrors how a keyword lexicon is grown from a domain corpus:
//!
//! - [`corpus`] reads and writes the combined disclosure file.
//! - [`text`] tokenizes, normalizes and merges collocations into phrases.
//! - [`embedding`] trains skip-gram negative-sampling vectors and answers
//!   cosine queries.
//! - [`lexicon`] expands seed lists into candidates, applies the human
//!   review ledger and loads/saves the final lexicon.
//! - [`cluster`] validates a lexicon with PCA, k-means and silhouette sweeps.
//! - [`scorer`] compiles a lexicon into a token automaton and scores corpora.
//! - [`eval`] prepares sentence datasets and evaluates classifier outputs.
//! - [`cli`] wires the stages together behind the `hclex` binary.

pub mod cli;
pub mod cluster;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod lexicon;
pub mod scorer;
pub mod synthetic;
pub mod text;
mod workers;

pub use error::{Error, Result};
