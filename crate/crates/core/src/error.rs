use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("unknown token `{0}`")]
    UnknownToken(String),

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("no seed word was found in the vocabulary")]
    NoSeedsInVocabulary,

    #[error("seed `{seed}` appears in both `{first}` and `{second}`")]
    SeedInTwoCategories {
        seed: String,
        first: String,
        second: String,
    },

    #[error("undeclared category `{0}`")]
    UndeclaredCategory(String),

    #[error("category empty: `{0}`")]
    EmptyCategory(String),

    #[error("duplicate term `{0}`")]
    DuplicateTerm(String),

    #[error("unknown subcategory `{subcategory}` for category `{category}`")]
    UnknownSubcategory {
        category: String,
        subcategory: String,
    },

    #[error("term `{0}` normalizes to an empty token sequence")]
    EmptyPattern(String),

    #[error("terms `{first}` and `{second}` collide on token sequence `{sequence}` across categories")]
    PatternCollision {
        sequence: String,
        first: String,
        second: String,
    },

    #[error("requested {requested} components but at most {bound} are available")]
    RankBound { requested: usize, bound: usize },

    #[error("non-HC sentence pool has {available} sentences, {required} required")]
    InsufficientPool { required: usize, available: usize },

    #[error("no positive labels")]
    NoPositiveLabels,

    #[error("bad embedding file: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Errors caused by the caller's data rather than by this crate or the host.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Json(_))
    }
}
