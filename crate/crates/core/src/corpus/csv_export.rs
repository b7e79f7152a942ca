use std::io::{Read, Write};

use super::{format_date, parse_date, Corpus, Document, DocumentHeader};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["cik", "company_name", "filing_date", "fiscal_period", "text"];

/// One row per document; embedded commas, quotes and newlines are quoted.
pub fn write_csv<W: Write>(corpus: &Corpus, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for doc in corpus {
        let h = &doc.header;
        w.write_record([
            h.cik.as_str(),
            h.company_name.as_str(),
            &format_date(h.filing_date),
            &format_date(h.fiscal_period),
            doc.text.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Corpus> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::invalid(format!(
            "unexpected corpus CSV header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut documents = Vec::new();
    for row in r.records() {
        let row = row?;
        let header = DocumentHeader::new(
            &row[0],
            &row[1],
            parse_date(&row[2])?,
            parse_date(&row[3])?,
        );
        documents.push(Document::new(header, &row[4]));
    }
    Corpus::new(documents)
}
