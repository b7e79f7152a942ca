use std::collections::HashMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{validate_seeds, SeedList, Source};
use crate::embedding::{EmbeddingMatrix, Vocabulary};
use crate::error::{Error, Result};
use crate::workers::run_with_workers;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpandOptions {
    pub threshold: f64,
    /// Also keep terms with `cos <= -threshold` against some seed.
    pub include_antonyms: bool,
    pub workers: usize,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            include_antonyms: true,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub term: String,
    /// Mean signed cosine against the in-vocabulary seeds of each category,
    /// aligned with [`Expansion::categories`]; `None` when a category has
    /// no seed in the vocabulary.
    pub category_means: Vec<Option<f64>>,
    pub max_abs_similarity: f64,
    /// The seed cosine of largest magnitude, sign kept.
    pub signed_best_similarity: f64,
    pub proposed_category: String,
    pub source: Source,
    pub negative_polarity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expansion {
    pub categories: Vec<String>,
    pub candidates: Vec<Candidate>,
    /// (category, seed) pairs whose seed is absent from the vocabulary.
    pub missing_seeds: Vec<(String, String)>,
}

struct SeedIndex {
    categories: Vec<String>,
    /// (vocab id, category index) in seed-file order.
    seeds: Vec<(u32, usize)>,
    category_of: HashMap<u32, usize>,
    missing: Vec<(String, String)>,
    norms: Vec<f64>,
}

fn row_norms(matrix: &EmbeddingMatrix) -> Vec<f64> {
    (0..matrix.rows() as u32).map(|i| matrix.row_norm(i)).collect()
}

impl SeedIndex {
    fn new(matrix: &EmbeddingMatrix, vocab: &Vocabulary, lists: &[SeedList]) -> Result<Self> {
        validate_seeds(lists)?;
        if vocab.len() != matrix.rows() {
            return Err(Error::LengthMismatch {
                left: vocab.len(),
                right: matrix.rows(),
            });
        }
        let norms = row_norms(matrix);
        let mut seeds = Vec::new();
        let mut category_of = HashMap::new();
        let mut missing = Vec::new();
        for (ci, list) in lists.iter().enumerate() {
            for key in list.keys() {
                match vocab.id(&key) {
                    Some(id) if norms[id as usize] > 0.0 => {
                        seeds.push((id, ci));
                        category_of.insert(id, ci);
                    }
                    _ => missing.push((list.category.clone(), key)),
                }
            }
        }
        if seeds.is_empty() {
            return Err(Error::NoSeedsInVocabulary);
        }
        Ok(Self {
            categories: lists.iter().map(|l| l.category.clone()).collect(),
            seeds,
            category_of,
            missing,
            norms,
        })
    }

    fn stats(&self, matrix: &EmbeddingMatrix, id: u32) -> Option<TermStats> {
        let n = self.norms[id as usize];
        if n == 0.0 {
            return None;
        }
        let row = matrix.row(id);
        let k = self.categories.len();
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        let mut best = 0.0f64;
        let mut max = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        for &(sid, ci) in &self.seeds {
            let dot: f64 = row
                .iter()
                .zip(matrix.row(sid))
                .map(|(&a, &b)| a as f64 * b as f64)
                .sum();
            let c = (dot / (n * self.norms[sid as usize])).clamp(-1.0, 1.0);
            sums[ci] += c;
            counts[ci] += 1;
            if c.abs() > best.abs() {
                best = c;
            }
            max = max.max(c);
            min = min.min(c);
        }
        let total: f64 = sums.iter().sum();
        let means = sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
            .collect();
        Some(TermStats {
            means,
            overall_mean: total / self.seeds.len() as f64,
            signed_best: best,
            max,
            min,
        })
    }
}

struct TermStats {
    means: Vec<Option<f64>>,
    overall_mean: f64,
    signed_best: f64,
    max: f64,
    min: f64,
}

/// First category with the largest mean.
fn argmax(means: &[Option<f64>]) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, m) in means.iter().enumerate() {
        if let Some(m) = *m {
            if best.is_none_or(|(_, b)| m > b) {
                best = Some((i, m));
            }
        }
    }
    best.map_or(0, |(i, _)| i)
}

/// Candidates in vocabulary-id order. Seeds found in the vocabulary are
/// always emitted (with `source = seed`, proposed to their own category);
/// any other term is kept when some seed cosine reaches the threshold, or
/// falls to `-threshold` or below with antonyms enabled.
pub fn expand(
    matrix: &EmbeddingMatrix,
    vocab: &Vocabulary,
    seeds: &[SeedList],
    options: &ExpandOptions,
) -> Result<Expansion> {
    if !(options.threshold.is_finite()) {
        return Err(Error::invalid("threshold must be finite"));
    }
    let index = SeedIndex::new(matrix, vocab, seeds)?;
    let t = options.threshold;
    let candidates = run_with_workers(options.workers, || {
        (0..vocab.len() as u32)
            .into_par_iter()
            .filter_map(|id| {
                let s = index.stats(matrix, id)?;
                let seed_cat = index.category_of.get(&id).copied();
                let keep = s.max >= t || (options.include_antonyms && s.min <= -t);
                if seed_cat.is_none() && !keep {
                    return None;
                }
                let proposed = seed_cat.unwrap_or_else(|| argmax(&s.means));
                Some(Candidate {
                    term: vocab.token(id).to_owned(),
                    category_means: s.means,
                    max_abs_similarity: s.signed_best.abs(),
                    signed_best_similarity: s.signed_best,
                    proposed_category: index.categories[proposed].clone(),
                    source: if seed_cat.is_some() {
                        Source::Seed
                    } else {
                        Source::Expanded
                    },
                    negative_polarity: s.signed_best < 0.0,
                })
            })
            .collect()
    });
    Ok(Expansion {
        categories: index.categories,
        candidates,
        missing_seeds: index.missing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    /// Terms whose largest-magnitude seed cosine falls in the bin.
    pub max_abs_count: u64,
    /// Terms whose mean cosine over all seeds falls in the bin.
    pub mean_count: u64,
}

pub const HISTOGRAM_BINS: usize = 40;

fn bin_of(x: f64) -> usize {
    (((x + 1.0) * 20.0).floor().max(0.0) as usize).min(HISTOGRAM_BINS - 1)
}

/// Distribution of seed similarity over all non-seed terms, in 0.05-wide
/// bins over [-1, 1]; the last bin is closed.
pub fn similarity_histogram(
    matrix: &EmbeddingMatrix,
    vocab: &Vocabulary,
    seeds: &[SeedList],
) -> Result<Vec<HistogramBin>> {
    let index = SeedIndex::new(matrix, vocab, seeds)?;
    let mut bins: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|i| HistogramBin {
            lower: -1.0 + i as f64 * 0.05,
            upper: -1.0 + (i + 1) as f64 * 0.05,
            max_abs_count: 0,
            mean_count: 0,
        })
        .collect();
    for id in 0..vocab.len() as u32 {
        if index.category_of.contains_key(&id) {
            continue;
        }
        if let Some(s) = index.stats(matrix, id) {
            bins[bin_of(s.signed_best)].max_abs_count += 1;
            bins[bin_of(s.overall_mean)].mean_count += 1;
        }
    }
    Ok(bins)
}

pub fn write_histogram<W: Write>(bins: &[HistogramBin], mut out: W) -> Result<()> {
    writeln!(out, "bin_lower,bin_upper,max_abs_signed_count,mean_over_seeds_count")?;
    for b in bins {
        writeln!(out, "{:.2},{:.2},{},{}", b.lower, b.upper, b.max_abs_count, b.mean_count)?;
    }
    out.flush()?;
    Ok(())
}

const CANDIDATE_FIXED: [&str; 6] = [
    "term",
    "proposed_category",
    "source",
    "max_abs_similarity",
    "signed_best_similarity",
    "negative_polarity",
];
const MEAN_PREFIX: &str = "mean:";

pub fn write_candidates<W: Write>(expansion: &Expansion, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header: Vec<String> = CANDIDATE_FIXED.iter().map(|s| s.to_string()).collect();
    header.extend(expansion.categories.iter().map(|c| format!("{MEAN_PREFIX}{c}")));
    w.write_record(&header)?;
    for c in &expansion.candidates {
        let mut row = vec![
            c.term.clone(),
            c.proposed_category.clone(),
            c.source.to_string(),
            c.max_abs_similarity.to_string(),
            c.signed_best_similarity.to_string(),
            c.negative_polarity.to_string(),
        ];
        row.extend(c.category_means.iter().map(|m| m.map(|m| m.to_string()).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_candidates<R: Read>(input: R) -> Result<Expansion> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    let fixed_ok = header.len() >= CANDIDATE_FIXED.len()
        && header.iter().zip(CANDIDATE_FIXED).all(|(a, b)| a == b);
    let categories: Option<Vec<String>> = header
        .iter()
        .skip(CANDIDATE_FIXED.len())
        .map(|h| h.strip_prefix(MEAN_PREFIX).map(String::from))
        .collect();
    let categories = match categories {
        Some(c) if fixed_ok && !c.is_empty() => c,
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "not a candidate export header".into(),
            })
        }
    };
    let mut candidates = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |m: String| Error::Parse { line, message: m };
        let num = |k: usize| {
            let s = rec.get(k).unwrap_or("");
            s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")))
        };
        let category_means = (0..categories.len())
            .map(|j| match rec.get(CANDIDATE_FIXED.len() + j).unwrap_or("") {
                "" => Ok(None),
                _ => num(CANDIDATE_FIXED.len() + j).map(Some),
            })
            .collect::<Result<_>>()?;
        let proposed = rec.get(1).unwrap_or("").to_owned();
        if !categories.contains(&proposed) {
            return Err(Error::UndeclaredCategory(proposed));
        }
        candidates.push(Candidate {
            term: rec.get(0).unwrap_or("").to_owned(),
            category_means,
            max_abs_similarity: num(3)?,
            signed_best_similarity: num(4)?,
            proposed_category: proposed,
            source: rec.get(2).unwrap_or("").parse().map_err(|e: Error| bad(e.to_string()))?,
            negative_polarity: rec
                .get(5)
                .unwrap_or("")
                .parse()
                .map_err(|_| bad("negative_polarity must be true or false".into()))?,
        });
    }
    Ok(Expansion {
        categories,
        candidates,
        missing_seeds: Vec::new(),
    })
}
