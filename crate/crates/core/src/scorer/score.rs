use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use super::CompiledMatcher;
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::workers::run_with_workers;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentScore {
    pub doc_id: String,
    pub total_tokens: u64,
    /// Hits per matcher column.
    pub counts: Vec<u64>,
}

impl DocumentScore {
    /// Hits as a percentage of all tokens; 0 for an empty document.
    pub fn percentage(&self, column: usize) -> f64 {
        if self.total_tokens == 0 {
            0.0
        } else {
            self.counts[column] as f64 * 100.0 / self.total_tokens as f64
        }
    }

    pub fn total_hits(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn score_text(matcher: &CompiledMatcher, doc_id: &str, text: &str) -> DocumentScore {
    let ids = matcher.encode(text);
    DocumentScore {
        doc_id: doc_id.to_owned(),
        total_tokens: ids.len() as u64,
        counts: matcher.count_ids(&ids),
    }
}

pub fn score_document(matcher: &CompiledMatcher, doc: &Document) -> DocumentScore {
    score_text(matcher, doc.id(), &doc.text)
}

/// Scores in corpus order; the result does not depend on `workers`.
pub fn score_corpus(matcher: &CompiledMatcher, docs: &[Document], workers: usize) -> Vec<DocumentScore> {
    run_with_workers(workers, || docs.par_iter().map(|d| score_document(matcher, d)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreFailure {
    /// Position of the failed item in the input stream.
    pub index: usize,
    pub message: String,
}

const BATCH: usize = 512;

/// Scores a stream of documents batch by batch, handing each score to
/// `sink` in input order. Items that are errors are recorded and skipped.
pub fn score_stream<I, F>(
    matcher: &CompiledMatcher,
    docs: I,
    workers: usize,
    mut sink: F,
) -> Result<Vec<ScoreFailure>>
where
    I: IntoIterator<Item = Result<Document>>,
    F: FnMut(DocumentScore) -> Result<()>,
{
    let mut failures = Vec::new();
    let mut batch: Vec<Document> = Vec::with_capacity(BATCH);
    let flush = |batch: &mut Vec<Document>, sink: &mut F| -> Result<()> {
        for s in score_corpus(matcher, batch, workers) {
            sink(s)?;
        }
        batch.clear();
        Ok(())
    };
    for (index, item) in docs.into_iter().enumerate() {
        match item {
            Ok(d) => {
                batch.push(d);
                if batch.len() == BATCH {
                    flush(&mut batch, &mut sink)?;
                }
            }
            Err(e) => failures.push(ScoreFailure {
                index,
                message: e.to_string(),
            }),
        }
    }
    flush(&mut batch, &mut sink)?;
    Ok(failures)
}

/// Writes `doc_id,total_tokens,<counts>,<percentages>` with percentages
/// to four decimals.
pub struct ScoreWriter<W: Write> {
    out: csv::Writer<W>,
}

const COUNT_PREFIX: &str = "count:";
const PCT_PREFIX: &str = "pct:";

impl<W: Write> ScoreWriter<W> {
    pub fn new(out: W, labels: &[String]) -> Result<Self> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header = vec!["doc_id".to_string(), "total_tokens".to_string()];
        header.extend(labels.iter().map(|l| format!("{COUNT_PREFIX}{l}")));
        header.extend(labels.iter().map(|l| format!("{PCT_PREFIX}{l}")));
        out.write_record(&header)?;
        Ok(Self { out })
    }

    pub fn write(&mut self, s: &DocumentScore) -> Result<()> {
        let mut row = vec![s.doc_id.clone(), s.total_tokens.to_string()];
        row.extend(s.counts.iter().map(u64::to_string));
        row.extend((0..s.counts.len()).map(|c| format!("{:.4}", s.percentage(c))));
        self.out.write_record(&row)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Reads a scores CSV back as (column labels, scores).
pub fn read_scores<R: Read>(input: R) -> Result<(Vec<String>, Vec<DocumentScore>)> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    let labels: Vec<String> = header
        .iter()
        .filter_map(|h| h.strip_prefix(COUNT_PREFIX).map(String::from))
        .collect();
    let expected = 2 + 2 * labels.len();
    if header.get(0) != Some("doc_id") || header.get(1) != Some("total_tokens") || header.len() != expected {
        return Err(Error::Parse {
            line: 1,
            message: "not a scores header".into(),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let int = |k: usize| {
            rec.get(k).unwrap_or("").parse::<u64>().map_err(|_| Error::Parse {
                line: i + 2,
                message: format!("bad count in column {}", k + 1),
            })
        };
        out.push(DocumentScore {
            doc_id: rec.get(0).unwrap_or("").to_owned(),
            total_tokens: int(1)?,
            counts: (0..labels.len()).map(|c| int(2 + c)).collect::<Result<_>>()?,
        });
    }
    Ok((labels, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::doc;
    use crate::lexicon::CategoryKey;

    fn dei_matcher(terms: &[&str]) -> CompiledMatcher {
        let cols = vec![CategoryKey {
            category: "DEI".into(),
            subcategory: None,
        }];
        let terms: Vec<(String, usize)> = terms.iter().map(|t| (t.to_string(), 0)).collect();
        CompiledMatcher::build(cols, &terms).unwrap()
    }

    #[test]
    fn hand_counted_document() {
        let m = dei_matcher(&["diversity", "inclusion"]);
        let s = score_document(&m, &doc("1", "we value diversity and inclusion"));
        assert_eq!(s.counts, [2]);
        assert_eq!(s.total_tokens, 5);
        assert_eq!(s.percentage(0), 40.0);
        let empty = score_text(&m, "x", "");
        assert_eq!((empty.total_tokens, empty.counts[0], empty.percentage(0)), (0, 0, 0.0));
    }

    #[test]
    fn worker_count_does_not_change_scores() {
        let m = dei_matcher(&["diversity", "pay_equity", "inclusion"]);
        let docs: Vec<Document> = (0..100)
            .map(|i| doc(&i.to_string(), &format!("pay equity {} diversity {}", "x ".repeat(i % 7), "inclusion ".repeat(i % 3))))
            .collect();
        let one = score_corpus(&m, &docs, 1);
        assert_eq!(one, score_corpus(&m, &docs, 4));
        let singles: Vec<DocumentScore> = docs.iter().map(|d| score_document(&m, d)).collect();
        assert_eq!(one, singles);
        let mut streamed = Vec::new();
        let fails = score_stream(
            &m,
            docs.iter().cloned().map(Ok).chain(std::iter::once(Err(Error::invalid("bad record")))),
            2,
            |s| {
                streamed.push(s);
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(streamed, one);
        assert_eq!(fails, [ScoreFailure { index: 100, message: "invalid input: bad record".into() }]);
    }

    #[test]
    fn csv_round_trip() {
        let m = dei_matcher(&["diversity"]);
        let s = score_text(&m, "7", "diversity matters here");
        let mut buf = Vec::new();
        let mut w = ScoreWriter::new(&mut buf, &m.column_labels()).unwrap();
        w.write(&s).unwrap();
        w.finish().unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "doc_id,total_tokens,count:DEI,pct:DEI\n7,3,1,33.3333\n");
        let (labels, back) = read_scores(&buf[..]).unwrap();
        assert_eq!(labels, ["DEI"]);
        assert_eq!(back, [s]);
    }
}
