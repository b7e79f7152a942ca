//! The disclosure corpus: one HC disclosure per filer plus its identifiers.

mod combined;
mod csv_export;
mod selection;

use std::collections::HashSet;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::text;

pub use combined::{
    parse_combined, write_combined, write_combined_to_string, DuplicateRecord, ParseReport,
    Record, RecordReader, RejectedRecord, FORMAT_LINE,
};
pub use csv_export::{read_csv, write_csv, CSV_HEADER};
pub use selection::{ReconciledRow, RowKind, SampleSelection, SelectionRow};

const DATE_FORMAT: &str = "%Y-%m-%d";

/// Parses a strict `YYYY-MM-DD` date.
pub fn parse_date(s: &str) -> Result<NaiveDate> {
    let date = NaiveDate::parse_from_str(s, DATE_FORMAT)
        .map_err(|e| Error::invalid(format!("bad date `{s}`: {e}")))?;
    // chrono accepts unpadded fields; the file format does not
    if date.format(DATE_FORMAT).to_string() != s {
        return Err(Error::invalid(format!("bad date `{s}`: expected YYYY-MM-DD")));
    }
    Ok(date)
}

pub fn format_date(date: NaiveDate) -> String {
    date.format(DATE_FORMAT).to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentHeader {
    pub cik: String,
    pub company_name: String,
    pub filing_date: NaiveDate,
    pub fiscal_period: NaiveDate,
}

impl DocumentHeader {
    pub fn new(
        cik: impl Into<String>,
        company_name: impl Into<String>,
        filing_date: NaiveDate,
        fiscal_period: NaiveDate,
    ) -> Self {
        Self {
            cik: cik.into(),
            company_name: company_name.into(),
            filing_date,
            fiscal_period,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.cik.is_empty() || !self.cik.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::invalid(format!(
                "cik `{}` must be a nonempty digit string",
                self.cik
            )));
        }
        if self.company_name.contains(['\n', '\r']) {
            return Err(Error::invalid(format!(
                "company name for cik {} contains a line break",
                self.cik
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub header: DocumentHeader,
    pub text: String,
}

impl Document {
    pub fn new(header: DocumentHeader, text: impl Into<String>) -> Self {
        Self {
            header,
            text: text.into(),
        }
    }

    pub fn id(&self) -> &str {
        &self.header.cik
    }

    pub fn validate(&self) -> Result<()> {
        self.header.validate()?;
        if self.text.trim().is_empty() {
            return Err(Error::invalid(format!(
                "document {} has an empty body",
                self.header.cik
            )));
        }
        Ok(())
    }
}

/// An ordered set of documents with unique CIKs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
}

impl Corpus {
    /// Builds a corpus, rejecting invalid documents and duplicate CIKs.
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            doc.validate()?;
            if !seen.insert(doc.header.cik.as_str()) {
                return Err(Error::invalid(format!("duplicate cik {}", doc.header.cik)));
            }
        }
        Ok(Self { documents })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.documents.iter()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, cik: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.header.cik == cik)
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.documents.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct CorpusStats {
    pub document_count: usize,
    pub total_tokens: u64,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let total_tokens = corpus
        .iter()
        .map(|d| text::count_tokens(&d.text) as u64)
        .sum();
    CorpusStats {
        document_count: corpus.len(),
        total_tokens,
    }
}
