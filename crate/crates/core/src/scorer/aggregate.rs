use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate};
use serde::Serialize;

use super::DocumentScore;
use crate::corpus::format_date;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bucket {
    /// Consecutive `n`-day windows starting at the earliest date.
    Days(u32),
    CalendarYear,
}

impl FromStr for Bucket {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "year" {
            return Ok(Bucket::CalendarYear);
        }
        match s.strip_prefix("days:").map(str::parse::<u32>) {
            Some(Ok(n)) if n > 0 => Ok(Bucket::Days(n)),
            _ => Err(Error::Config(format!("bucket `{s}` is not `days:N` or `year`"))),
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bucket::Days(n) => write!(f, "days:{n}"),
            Bucket::CalendarYear => f.write_str("year"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub bucket: String,
    pub doc_count: usize,
    /// Mean over documents of hits / total tokens, in percent.
    pub mean_percentage: Vec<f64>,
    pub mean_count: Vec<f64>,
    /// Each column's share of all hits in the bucket, in percent.
    pub hit_share: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub columns: Vec<String>,
    pub rows: Vec<AggregateRow>,
    /// Documents left out for lack of a date or group.
    pub unassigned: Vec<String>,
}

fn summarize(bucket: String, docs: &[&DocumentScore], ncols: usize) -> AggregateRow {
    let n = docs.len() as f64;
    let mut pct = vec![0.0; ncols];
    let mut cnt = vec![0.0; ncols];
    let mut hits = vec![0u64; ncols];
    for d in docs {
        for c in 0..ncols {
            pct[c] += d.percentage(c);
            cnt[c] += d.counts[c] as f64;
            hits[c] += d.counts[c];
        }
    }
    let total: u64 = hits.iter().sum();
    AggregateRow {
        bucket,
        doc_count: docs.len(),
        mean_percentage: pct.iter().map(|p| p / n).collect(),
        mean_count: cnt.iter().map(|c| c / n).collect(),
        hit_share: hits
            .iter()
            .map(|&h| if total == 0 { 0.0 } else { h as f64 * 100.0 / total as f64 })
            .collect(),
    }
}

fn check_widths(columns: &[String], scores: &[DocumentScore]) -> Result<()> {
    match scores.iter().find(|s| s.counts.len() != columns.len()) {
        Some(s) => Err(Error::LengthMismatch {
            left: columns.len(),
            right: s.counts.len(),
        }),
        None => Ok(()),
    }
}

/// Groups documents into time buckets keyed by the bucket's first day
/// (`YYYY-MM-DD`) or by year. Empty buckets are omitted.
pub fn aggregate_by_period(
    columns: &[String],
    scores: &[DocumentScore],
    dates: &HashMap<String, NaiveDate>,
    bucket: Bucket,
) -> Result<AggregateReport> {
    check_widths(columns, scores)?;
    let origin = scores.iter().filter_map(|s| dates.get(&s.doc_id)).min().copied();
    let mut groups: BTreeMap<NaiveDate, Vec<&DocumentScore>> = BTreeMap::new();
    let mut unassigned = Vec::new();
    for s in scores {
        let Some(&d) = dates.get(&s.doc_id) else {
            unassigned.push(s.doc_id.clone());
            continue;
        };
        let start = match (bucket, origin) {
            (Bucket::Days(n), Some(o)) => {
                let offset = (d - o).num_days() as u64 / n as u64 * n as u64;
                o + Days::new(offset)
            }
            _ => NaiveDate::from_ymd_opt(d.year(), 1, 1).expect("valid"),
        };
        groups.entry(start).or_default().push(s);
    }
    let rows = groups
        .into_iter()
        .map(|(start, docs)| {
            let key = match bucket {
                Bucket::CalendarYear => start.year().to_string(),
                Bucket::Days(_) => format_date(start),
            };
            summarize(key, &docs, columns.len())
        })
        .collect();
    Ok(AggregateReport {
        columns: columns.to_vec(),
        rows,
        unassigned,
    })
}

/// Groups documents by a caller-supplied key, sorted by key.
pub fn aggregate_by_group(
    columns: &[String],
    scores: &[DocumentScore],
    groups: &HashMap<String, String>,
) -> Result<AggregateReport> {
    check_widths(columns, scores)?;
    let mut by: BTreeMap<&str, Vec<&DocumentScore>> = BTreeMap::new();
    let mut unassigned = Vec::new();
    for s in scores {
        match groups.get(&s.doc_id) {
            Some(g) => by.entry(g.as_str()).or_default().push(s),
            None => unassigned.push(s.doc_id.clone()),
        }
    }
    Ok(AggregateReport {
        columns: columns.to_vec(),
        rows: by
            .into_iter()
            .map(|(g, docs)| summarize(g.to_owned(), &docs, columns.len()))
            .collect(),
        unassigned,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    MeanPercentage,
    MeanCount,
    HitShare,
}

/// `bucket,<columns>,doc_count` with values to four decimals.
pub fn write_aggregate<W: Write>(report: &AggregateReport, measure: Measure, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec!["bucket".to_string()];
    header.extend(report.columns.iter().cloned());
    header.push("doc_count".into());
    w.write_record(&header)?;
    for r in &report.rows {
        let values = match measure {
            Measure::MeanPercentage => &r.mean_percentage,
            Measure::MeanCount => &r.mean_count,
            Measure::HitShare => &r.hit_share,
        };
        let mut row = vec![r.bucket.clone()];
        row.extend(values.iter().map(|v| format!("{v:.4}")));
        row.push(r.doc_count.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
