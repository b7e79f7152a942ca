//! Lexicon matching over token streams and the per-document and
//! aggregate measures built on it.

mod aggregate;
mod matcher;
mod score;

pub use aggregate::{
    aggregate_by_group, aggregate_by_period, write_aggregate, AggregateReport, AggregateRow, Bucket, Measure,
};
pub use matcher::{CompileOptions, CompiledMatcher, SENTINEL};
pub use score::{
    read_scores, score_corpus, score_document, score_stream, score_text, DocumentScore, ScoreFailure,
    ScoreWriter,
};
