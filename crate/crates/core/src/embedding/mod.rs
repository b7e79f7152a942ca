//! Word vectors: vocabulary, SGNS training, cosine queries and persistence.

mod io;
mod sgns;
mod vocab;

pub use io::{read_embeddings, read_text_vectors, write_embeddings, write_text_vectors};
pub use sgns::{sgns_gradient, sgns_loss, train, train_with_stats, SgnsGradient, TrainConfig, TrainStats};
pub use vocab::{build_vocab, Vocabulary};

use crate::error::{Error, Result};

/// Input (and optionally output) vectors, row-major `V × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    input: Vec<f32>,
    output: Option<Vec<f32>>,
}

impl EmbeddingMatrix {
    pub fn new(dim: usize, input: Vec<f32>) -> Result<Self> {
        if dim == 0 || input.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "{} values do not form rows of dimension {dim}",
                input.len()
            )));
        }
        Ok(Self {
            dim,
            input,
            output: None,
        })
    }

    pub fn with_output(dim: usize, input: Vec<f32>, output: Vec<f32>) -> Result<Self> {
        let mut m = Self::new(dim, input)?;
        if output.len() != m.input.len() {
            return Err(Error::LengthMismatch {
                left: m.input.len(),
                right: output.len(),
            });
        }
        m.output = Some(output);
        Ok(m)
    }

    /// Builds a matrix from explicit rows (all of the same length).
    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut input = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::LengthMismatch {
                    left: dim,
                    right: r.len(),
                });
            }
            input.extend_from_slice(r);
        }
        Self::new(dim, input)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.input.len() / self.dim
    }

    pub fn row(&self, id: u32) -> &[f32] {
        let start = id as usize * self.dim;
        &self.input[start..start + self.dim]
    }

    pub fn output_row(&self, id: u32) -> Option<&[f32]> {
        let start = id as usize * self.dim;
        self.output.as_ref().map(|o| &o[start..start + self.dim])
    }

    pub fn input(&self) -> &[f32] {
        &self.input
    }

    pub fn output(&self) -> Option<&[f32]> {
        self.output.as_deref()
    }

    /// Drops the output vectors, which queries never use.
    pub fn without_output(mut self) -> Self {
        self.output = None;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(self.output.iter().flatten()).all(|x| x.is_finite())
    }

    pub fn row_norm(&self, id: u32) -> f64 {
        norm(self.row(id))
    }
}

fn norm<T: Copy + Into<f64>>(v: &[T]) -> f64 {
    v.iter().map(|&x| x.into() * x.into()).sum::<f64>().sqrt()
}

/// Cosine similarity in f64, clamped to [-1, 1].
pub fn cosine<T: Copy + Into<f64>>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x.into() * y.into()).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimilarityMode {
    /// Every term with `|cos| >= t`.
    Threshold(f64),
    TopK(usize),
}

/// Terms most similar to `query` by absolute cosine over input vectors.
/// Ordered by `|score|` descending, then by vocabulary id. Zero rows are
/// skipped since their cosine is undefined.
pub fn similar_terms(
    matrix: &EmbeddingMatrix,
    vocab: &Vocabulary,
    query: &str,
    mode: SimilarityMode,
) -> Result<Vec<(String, f64)>> {
    let qid = vocab
        .id(query)
        .ok_or_else(|| Error::UnknownToken(query.to_owned()))?;
    let q = matrix.row(qid);
    if norm(q) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut hits: Vec<(u32, f64)> = Vec::new();
    for id in 0..vocab.len() as u32 {
        if id == qid {
            continue;
        }
        let Ok(c) = cosine(q, matrix.row(id)) else {
            continue;
        };
        if let SimilarityMode::Threshold(t) = mode {
            if c.abs() < t {
                continue;
            }
        }
        hits.push((id, c));
    }
    hits.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    if let SimilarityMode::TopK(k) = mode {
        hits.truncate(k);
    }
    Ok(hits
        .into_iter()
        .map(|(id, c)| (vocab.token(id).to_owned(), c))
        .collect())
}
