use std::collections::HashMap;

use crate::error::{Error, Result};

/// Token ↔ id map with corpus frequencies. Ids are dense and ordered by
/// descending frequency, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    index: HashMap<String, u32>,
    tokens: Vec<String>,
    counts: Vec<u64>,
    min_count: u64,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from stored parts, re-checking its invariants.
    pub fn from_parts(tokens: Vec<String>, counts: Vec<u64>, min_count: u64) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if tokens.len() != counts.len() {
            return Err(Error::LengthMismatch {
                left: tokens.len(),
                right: counts.len(),
            });
        }
        if let Some(i) = counts.iter().position(|&c| c < min_count) {
            return Err(Error::invalid(format!(
                "token `{}` has count {} below min_count {min_count}",
                tokens[i], counts[i]
            )));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::DuplicateTerm(t.clone()));
            }
        }
        Ok(Self {
            index,
            tokens,
            counts,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Maps a stream to ids, dropping out-of-vocabulary tokens.
    pub fn encode<S: AsRef<str>>(&self, stream: &[S]) -> Vec<u32> {
        stream.iter().filter_map(|t| self.id(t.as_ref())).collect()
    }
}

pub fn build_vocab<S: AsRef<[String]>>(streams: &[S], min_count: u64) -> Result<Vocabulary> {
    if min_count < 1 {
        return Err(Error::invalid("min_count must be >= 1"));
    }
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for s in streams {
        for t in s.as_ref() {
            *freq.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = freq.into_iter().filter(|&(_, c)| c >= min_count).collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let (tokens, counts) = kept.into_iter().map(|(t, c)| (t.to_owned(), c)).unzip();
    Vocabulary::from_parts(tokens, counts, min_count)
}
