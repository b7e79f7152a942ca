//! Tokenization, lemma-lite normalization and collocation phrases.

mod normalize;
mod phrases;
mod tokenize;

pub use normalize::{normalize_token, normalize_token_cow};
pub use phrases::{learn_phrases, merge_phrases, PhraseConfig, PhraseTable};
pub use tokenize::{count_tokens, for_each_token, tokenize};

/// Ordered lowercase tokens of one document.
pub type TokenStream = Vec<String>;

/// Tokenizes and normalizes every token: the stream fed to phrase learning,
/// embedding training and scoring.
pub fn normalized_tokens(text: &str) -> TokenStream {
    let mut out = Vec::new();
    for_each_token(text, |t| out.push(normalize_token_cow(t).into_owned()));
    out
}
