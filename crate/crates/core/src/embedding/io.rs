//! Binary and text persistence for trained vectors.
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! magic  b"HCLXEMB\0"
//! u32    version (1)
//! u64    V
//! u32    D
//! u32    flags (bit 0: output vectors present)
//! u64    min_count
//! V ×    { u32 byte length, UTF-8 token, u64 count }
//! V·D    f32 input vectors, row-major
//! V·D    f32 output vectors (if flagged)
//! ```

use std::io::{BufRead, Read, Write};

use super::{EmbeddingMatrix, Vocabulary};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"HCLXEMB\0";
const VERSION: u32 = 1;
const FLAG_OUTPUT: u32 = 1;
const MAX_TOKEN_BYTES: u32 = 1 << 20;

pub fn write_embeddings<W: Write>(
    mut out: W,
    vocab: &Vocabulary,
    matrix: &EmbeddingMatrix,
) -> Result<()> {
    if vocab.len() != matrix.rows() {
        return Err(Error::LengthMismatch {
            left: vocab.len(),
            right: matrix.rows(),
        });
    }
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(vocab.len() as u64).to_le_bytes())?;
    out.write_all(&(matrix.dim() as u32).to_le_bytes())?;
    let flags = if matrix.output().is_some() { FLAG_OUTPUT } else { 0 };
    out.write_all(&flags.to_le_bytes())?;
    out.write_all(&vocab.min_count().to_le_bytes())?;
    for (token, count) in vocab.tokens().iter().zip(vocab.counts()) {
        out.write_all(&(token.len() as u32).to_le_bytes())?;
        out.write_all(token.as_bytes())?;
        out.write_all(&count.to_le_bytes())?;
    }
    write_floats(&mut out, matrix.input())?;
    if let Some(o) = matrix.output() {
        write_floats(&mut out, o)?;
    }
    out.flush()?;
    Ok(())
}

fn write_floats<W: Write>(out: &mut W, values: &[f32]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 4);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    input
        .read_exact(&mut b)
        .map_err(|e| Error::Format(format!("truncated embedding file: {e}")))?;
    Ok(b)
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(input)?))
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(input)?))
}

fn read_floats<R: Read>(input: &mut R, n: usize) -> Result<Vec<f32>> {
    let mut buf = vec![0u8; n * 4];
    input
        .read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated embedding file: {e}")))?;
    Ok(buf
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

pub fn read_embeddings<R: Read>(mut input: R) -> Result<(Vocabulary, EmbeddingMatrix)> {
    let magic: [u8; 8] = read_array(&mut input)?;
    if &magic != MAGIC {
        return Err(Error::Format("not an embedding file (bad magic)".into()));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported embedding version {version}")));
    }
    let v = read_u64(&mut input)? as usize;
    let d = read_u32(&mut input)? as usize;
    let flags = read_u32(&mut input)?;
    let min_count = read_u64(&mut input)?;
    if d == 0 {
        return Err(Error::Format("dimension 0".into()));
    }
    let mut tokens = Vec::new();
    let mut counts = Vec::new();
    for _ in 0..v {
        let len = read_u32(&mut input)?;
        if len > MAX_TOKEN_BYTES {
            return Err(Error::Format(format!("token length {len} too large")));
        }
        let mut b = vec![0u8; len as usize];
        input
            .read_exact(&mut b)
            .map_err(|e| Error::Format(format!("truncated embedding file: {e}")))?;
        tokens.push(String::from_utf8(b).map_err(|_| Error::Format("token is not UTF-8".into()))?);
        counts.push(read_u64(&mut input)?);
    }
    let vocab = Vocabulary::from_parts(tokens, counts, min_count)?;
    let input_vecs = read_floats(&mut input, v * d)?;
    let matrix = if flags & FLAG_OUTPUT != 0 {
        let output = read_floats(&mut input, v * d)?;
        EmbeddingMatrix::with_output(d, input_vecs, output)?
    } else {
        EmbeddingMatrix::new(d, input_vecs)?
    };
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after embedding data".into()));
    }
    Ok((vocab, matrix))
}

/// `token v1 … vD` per line, input vectors only. Floats use the shortest
/// representation that parses back exactly.
pub fn write_text_vectors<W: Write>(
    mut out: W,
    vocab: &Vocabulary,
    matrix: &EmbeddingMatrix,
) -> Result<()> {
    for (id, token) in vocab.tokens().iter().enumerate() {
        out.write_all(token.as_bytes())?;
        for x in matrix.row(id as u32) {
            write!(out, " {x}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the text export back. Counts are not stored there, so the returned
/// tokens are in file order.
pub fn read_text_vectors<R: BufRead>(input: R) -> Result<(Vec<String>, EmbeddingMatrix)> {
    let mut tokens = Vec::new();
    let mut values = Vec::new();
    let mut dim = None;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let token = parts.next().unwrap_or_default().to_owned();
        let row: Vec<f32> = parts
            .map(|p| {
                p.parse::<f32>().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("bad float `{p}`"),
                })
            })
            .collect::<Result<_>>()?;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {d} values, found {}", row.len()),
                })
            }
            _ => {}
        }
        tokens.push(token);
        values.extend(row);
    }
    let matrix = EmbeddingMatrix::new(dim.unwrap_or(0), values)?;
    Ok((tokens, matrix))
}
