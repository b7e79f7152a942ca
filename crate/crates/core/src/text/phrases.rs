//! Collocation phrases joined with `_`, learned with the count-ratio score
//! `(count(ab) - min_count) * N / (count(a) * count(b))`, N = vocabulary size.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhraseConfig {
    pub min_count: u64,
    pub threshold: f64,
    pub passes: usize,
}

impl Default for PhraseConfig {
    fn default() -> Self {
        Self {
            min_count: 5,
            threshold: 10.0,
            passes: 2,
        }
    }
}

impl PhraseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_count < 1 {
            return Err(Error::invalid("phrase min_count must be >= 1"));
        }
        if self.passes < 1 {
            return Err(Error::invalid("phrase passes must be >= 1"));
        }
        if !self.threshold.is_finite() {
            return Err(Error::invalid("phrase threshold must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhraseTable {
    pairs: HashMap<String, HashMap<String, f64>>,
    len: usize,
}

impl PhraseTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: impl Into<String>, b: impl Into<String>, score: f64) {
        let prev = self.pairs.entry(a.into()).or_default().insert(b.into(), score);
        if prev.is_none() {
            self.len += 1;
        }
    }

    pub fn score(&self, a: &str, b: &str) -> Option<f64> {
        self.pairs.get(a)?.get(b).copied()
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        self.score(a, b).is_some()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Entries sorted by descending score, then by the pair.
    pub fn entries(&self) -> Vec<(&str, &str, f64)> {
        let mut v: Vec<_> = self
            .pairs
            .iter()
            .flat_map(|(a, m)| m.iter().map(move |(b, s)| (a.as_str(), b.as_str(), *s)))
            .collect();
        v.sort_by(|x, y| y.2.total_cmp(&x.2).then_with(|| (x.0, x.1).cmp(&(y.0, y.1))));
        v
    }

    /// Merges `passes` times, so phrases learned on merged streams apply too.
    pub fn apply(&self, stream: &[String], passes: usize) -> Vec<String> {
        let mut cur = merge_phrases(stream, self);
        for _ in 1..passes {
            let next = merge_phrases(&cur, self);
            if next.len() == cur.len() {
                break;
            }
            cur = next;
        }
        cur
    }

    /// `token_a<TAB>token_b<TAB>score`, descending by score.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for (a, b, s) in self.entries() {
            writeln!(out, "{a}\t{b}\t{s}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(input: R) -> Result<Self> {
        let mut table = Self::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: &str| Error::Parse {
                line: i + 1,
                message: message.into(),
            };
            let mut fields = line.split('\t');
            let (Some(a), Some(b), Some(s), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(parse_err("expected 3 tab-separated fields"));
            };
            let score: f64 = s.parse().map_err(|_| parse_err("bad score"))?;
            table.insert(a, b, score);
        }
        Ok(table)
    }
}

/// Greedy left-to-right merge: an adjacent pair in `table` becomes `a_b` and
/// the scan resumes after it.
pub fn merge_phrases(stream: &[String], table: &PhraseTable) -> Vec<String> {
    if table.is_empty() {
        return stream.to_vec();
    }
    let mut out = Vec::with_capacity(stream.len());
    let mut i = 0;
    while i < stream.len() {
        if i + 1 < stream.len() && table.contains(&stream[i], &stream[i + 1]) {
            out.push(format!("{}_{}", stream[i], stream[i + 1]));
            i += 2;
        } else {
            out.push(stream[i].clone());
            i += 1;
        }
    }
    out
}

fn score_pass(streams: &[Vec<String>], config: &PhraseConfig) -> PhraseTable {
    let mut unigrams: HashMap<&str, u64> = HashMap::new();
    let mut bigrams: HashMap<(&str, &str), u64> = HashMap::new();
    for s in streams {
        for t in s {
            *unigrams.entry(t.as_str()).or_default() += 1;
        }
        for w in s.windows(2) {
            *bigrams.entry((w[0].as_str(), w[1].as_str())).or_default() += 1;
        }
    }
    let vocab_size = unigrams.len() as f64;
    let min_count = config.min_count as f64;
    let mut table = PhraseTable::new();
    for ((a, b), n_ab) in bigrams {
        let denom = (unigrams[a] * unigrams[b]) as f64;
        let score = (n_ab as f64 - min_count) * vocab_size / denom;
        if score > config.threshold {
            table.insert(a, b, score);
        }
    }
    table
}

/// Learns phrases over `config.passes` passes; pass `p + 1` scores the
/// streams merged with everything learned up to pass `p`.
pub fn learn_phrases(streams: &[Vec<String>], config: &PhraseConfig) -> Result<PhraseTable> {
    config.validate()?;
    let mut table = PhraseTable::new();
    let mut current: Vec<Vec<String>> = Vec::new();
    for pass in 0..config.passes {
        let input = if pass == 0 { streams } else { &current[..] };
        let learned = score_pass(input, config);
        if learned.is_empty() {
            break;
        }
        for (a, b, s) in learned.entries() {
            table.insert(a, b, s);
        }
        if pass + 1 < config.passes {
            current = input.iter().map(|s| merge_phrases(s, &table)).collect();
        }
    }
    Ok(table)
}
