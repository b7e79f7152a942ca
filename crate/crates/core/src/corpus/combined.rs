//! Record-oriented combined disclosure file.
//!
//! ```text
//! #CORPUS|hclex|1
//! #DOC|<cik>|<company_name>|<filing_date>|<fiscal_period>
//! <body lines>
//! #END
//! ```
//!
//! A body line that would read as a sentinel (it starts with `#DOC|` or
//! `#END` after any leading backslashes) is written with one extra leading
//! `\`, and the reader strips exactly one.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use super::{format_date, parse_date, Corpus, Document, DocumentHeader};
use crate::error::{Error, Result};

pub const FORMAT_LINE: &str = "#CORPUS|hclex|1";
const DOC_PREFIX: &str = "#DOC|";
const END_LINE: &str = "#END";

fn looks_like_sentinel(line: &str) -> bool {
    let rest = line.trim_start_matches('\\');
    rest.starts_with(DOC_PREFIX) || rest.starts_with(END_LINE)
}

fn escape_line(line: &str) -> std::borrow::Cow<'_, str> {
    if looks_like_sentinel(line) {
        format!("\\{line}").into()
    } else {
        line.into()
    }
}

fn unescape_line(line: &str) -> &str {
    if line.starts_with('\\') && looks_like_sentinel(line) {
        &line[1..]
    } else {
        line
    }
}

fn parse_header(line: &str, line_no: usize) -> Result<DocumentHeader> {
    let err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let rest = line
        .strip_prefix(DOC_PREFIX)
        .ok_or_else(|| err("expected `#DOC|` header".into()))?;
    // the name may itself contain `|`: dates are taken from the right
    let mut right = rest.rsplitn(3, '|');
    let fiscal = right.next();
    let filing = right.next();
    let left = right.next();
    let (Some(fiscal), Some(filing), Some(left)) = (fiscal, filing, left) else {
        return Err(err(format!("malformed header `{line}`")));
    };
    let (cik, name) = left
        .split_once('|')
        .ok_or_else(|| err(format!("malformed header `{line}`")))?;
    let filing_date = parse_date(filing).map_err(|e| err(e.to_string()))?;
    let fiscal_period = parse_date(fiscal).map_err(|e| err(e.to_string()))?;
    let header = DocumentHeader::new(cik, name, filing_date, fiscal_period);
    header.validate().map_err(|e| err(e.to_string()))?;
    Ok(header)
}

/// One record read from a combined file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Document { line: usize, document: Document },
    /// A well-formed record whose body is blank.
    Rejected(RejectedRecord),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRecord {
    pub line: usize,
    pub cik: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicateRecord {
    pub line: usize,
    pub cik: String,
}

/// Streaming reader: holds at most one record in memory.
pub struct RecordReader<R> {
    reader: R,
    line_no: usize,
    buf: String,
    failed: bool,
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            reader,
            line_no: 0,
            buf: String::new(),
            failed: false,
        }
    }

    /// Reads the next physical line without its `\n`; `None` at EOF.
    fn next_line(&mut self) -> Result<Option<&str>> {
        self.buf.clear();
        let n = self.reader.read_line(&mut self.buf)?;
        if n == 0 {
            return Ok(None);
        }
        self.line_no += 1;
        if self.buf.ends_with('\n') {
            self.buf.pop();
        }
        Ok(Some(&self.buf))
    }

    fn read_record(&mut self) -> Result<Option<Record>> {
        // skip to the next header
        let (header, header_line) = loop {
            let line_no = self.line_no + 1;
            let Some(line) = self.next_line()? else {
                return Ok(None);
            };
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || (line_no == 1 && line == FORMAT_LINE) {
                continue;
            }
            if line.starts_with(DOC_PREFIX) {
                break (parse_header(line, line_no)?, line_no);
            }
            return Err(Error::Parse {
                line: line_no,
                message: "text outside of a `#DOC|` record".into(),
            });
        };

        let mut body = String::new();
        let mut first = true;
        loop {
            let line_no = self.line_no + 1;
            let Some(line) = self.next_line()? else {
                return Err(Error::Parse {
                    line: header_line,
                    message: format!("record for cik {} has no `#END` line", header.cik),
                });
            };
            let trimmed = line.trim_end_matches('\r');
            if trimmed == END_LINE {
                break;
            }
            if trimmed.starts_with(DOC_PREFIX) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("record for cik {} is not terminated", header.cik),
                });
            }
            if !first {
                body.push('\n');
            }
            first = false;
            let unescaped = unescape_line(line);
            body.push_str(unescaped);
        }

        if body.trim().is_empty() {
            return Ok(Some(Record::Rejected(RejectedRecord {
                line: header_line,
                cik: header.cik,
                reason: "empty body".into(),
            })));
        }
        Ok(Some(Record::Document {
            line: header_line,
            document: Document::new(header, body),
        }))
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<Record>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.read_record() {
            Ok(Some(r)) => Some(Ok(r)),
            Ok(None) => None,
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Outcome of parsing a combined file.
#[derive(Debug, Clone, Default)]
pub struct ParseReport {
    pub corpus: Corpus,
    /// Later records whose CIK was already seen; the first one is kept.
    pub duplicates: Vec<DuplicateRecord>,
    /// Records dropped because their body was blank.
    pub rejected: Vec<RejectedRecord>,
}

impl ParseReport {
    pub fn warning_count(&self) -> usize {
        self.duplicates.len() + self.rejected.len()
    }
}

pub fn parse_combined<R: BufRead>(reader: R) -> Result<ParseReport> {
    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    let mut duplicates = Vec::new();
    let mut rejected = Vec::new();
    for record in RecordReader::new(reader) {
        match record? {
            Record::Document { line, document } => {
                if seen.insert(document.header.cik.clone()) {
                    documents.push(document);
                } else {
                    duplicates.push(DuplicateRecord {
                        line,
                        cik: document.header.cik,
                    });
                }
            }
            Record::Rejected(r) => rejected.push(r),
        }
    }
    Ok(ParseReport {
        corpus: Corpus { documents },
        duplicates,
        rejected,
    })
}

pub fn write_combined<W: Write>(corpus: &Corpus, mut out: W) -> Result<()> {
    writeln!(out, "{FORMAT_LINE}")?;
    for doc in corpus {
        let h = &doc.header;
        writeln!(
            out,
            "{DOC_PREFIX}{}|{}|{}|{}",
            h.cik,
            h.company_name,
            format_date(h.filing_date),
            format_date(h.fiscal_period)
        )?;
        for line in doc.text.split('\n') {
            writeln!(out, "{}", escape_line(line))?;
        }
        writeln!(out, "{END_LINE}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_combined_to_string(corpus: &Corpus) -> String {
    let mut buf = Vec::new();
    write_combined(corpus, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("corpus text is UTF-8")
}
