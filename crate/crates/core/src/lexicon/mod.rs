//! Seed lists, candidate expansion, review and the final lexicon.

mod expand;
mod review;
mod seeds;

pub use expand::{
    expand, read_candidates, similarity_histogram, write_candidates, write_histogram, Candidate,
    ExpandOptions, Expansion, HistogramBin,
};
pub use review::{apply_review, review_lexicon, Decision, LedgerEntry, ReviewLedger, ReviewOutcome};
pub use seeds::{load_seeds, validate_seeds, write_seeds, SeedList};

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::text::{for_each_token, normalize_token_cow};

pub const DEI: &str = "Diversity, Equity, and Inclusion (DEI)";
pub const HEALTH_AND_SAFETY: &str = "Health and Safety";
pub const LABOR_RELATIONS: &str = "Labor Relations and Culture";
pub const COMPENSATION: &str = "Compensation and Benefits";
pub const DEMOGRAPHICS: &str = "Demographics and Others";

const PUBLISHED_LEXICON: &str = include_str!("../../data/hc_lexicon.csv");
const PUBLISHED_ACRONYMS: &str = include_str!("../../data/acronyms.csv");
pub(crate) const PUBLISHED_SEEDS: &str = include_str!("../../data/seeds.csv");

/// Published term counts per (category, subcategory).
pub const PUBLISHED_COUNTS: &[(&str, Option<&str>, usize)] = &[
    (DEI, None, 253),
    (HEALTH_AND_SAFETY, Some("general"), 157),
    (HEALTH_AND_SAFETY, Some("covid"), 70),
    (LABOR_RELATIONS, None, 362),
    (COMPENSATION, None, 283),
    (DEMOGRAPHICS, None, 160),
];
pub const PUBLISHED_TOTAL: usize = 1285;

/// Token sequence a term stands for: split on `_`, then tokenized and
/// normalized exactly like document text.
pub fn term_sequence(term: &str) -> Vec<String> {
    let mut out = Vec::new();
    for piece in term.split('_') {
        for_each_token(piece, |t| out.push(normalize_token_cow(t).into_owned()));
    }
    out
}

/// Vocabulary key of a term after phrase merging: its sequence joined by `_`.
pub fn vocab_key(term: &str) -> String {
    term_sequence(term).join("_")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Seed,
    Expanded,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Seed => "seed",
            Source::Expanded => "expanded",
        })
    }
}

impl FromStr for Source {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seed" => Ok(Source::Seed),
            "expanded" => Ok(Source::Expanded),
            _ => Err(Error::invalid(format!("unknown source `{s}`"))),
        }
    }
}

/// Declared categories, in order, and the subcategories each may use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    categories: Vec<String>,
    subcategories: BTreeMap<String, Vec<String>>,
}

impl Schema {
    pub fn new(categories: Vec<String>, subcategories: BTreeMap<String, Vec<String>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &categories {
            if c.is_empty() || !seen.insert(c) {
                return Err(Error::invalid(format!("category `{c}` is empty or repeated")));
            }
        }
        Ok(Self {
            categories,
            subcategories,
        })
    }

    /// Categories in the given order with the standard subcategory table
    /// (Health and Safety: general, covid).
    pub fn with_standard_subcategories(categories: Vec<String>) -> Result<Self> {
        let subs = BTreeMap::from([(
            HEALTH_AND_SAFETY.to_owned(),
            vec!["general".to_owned(), "covid".to_owned()],
        )]);
        Self::new(categories, subs)
    }

    pub fn published() -> Self {
        Self::with_standard_subcategories(
            [DEI, HEALTH_AND_SAFETY, LABOR_RELATIONS, COMPENSATION, DEMOGRAPHICS]
                .map(String::from)
                .to_vec(),
        )
        .expect("published schema is valid")
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn subcategories(&self, category: &str) -> &[String] {
        self.subcategories.get(category).map_or(&[], Vec::as_slice)
    }

    pub fn contains(&self, category: &str) -> bool {
        self.categories.iter().any(|c| c == category)
    }

    pub fn check(&self, category: &str, subcategory: Option<&str>) -> Result<()> {
        if !self.contains(category) {
            return Err(Error::UndeclaredCategory(category.to_owned()));
        }
        if let Some(sub) = subcategory {
            if !self.subcategories(category).iter().any(|s| s == sub) {
                return Err(Error::UnknownSubcategory {
                    category: category.to_owned(),
                    subcategory: sub.to_owned(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LexiconEntry {
    pub term: String,
    pub category: String,
    pub subcategory: Option<String>,
    pub source: Source,
    pub similarity: Option<f64>,
}

/// Column a term is counted under when scoring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CategoryKey {
    pub category: String,
    pub subcategory: Option<String>,
}

impl CategoryKey {
    pub fn label(&self) -> String {
        match &self.subcategory {
            Some(s) => format!("{} ({s})", self.category),
            None => self.category.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    acronyms: BTreeMap<String, String>,
    schema: Schema,
}

impl Lexicon {
    /// Checks unique terms, declared categories and subcategories, and that
    /// every declared category has at least one term.
    pub fn new(
        entries: Vec<LexiconEntry>,
        acronyms: BTreeMap<String, String>,
        schema: Schema,
    ) -> Result<Self> {
        let mut terms = HashSet::new();
        for e in &entries {
            if e.term.is_empty() {
                return Err(Error::invalid("empty term"));
            }
            if !terms.insert(e.term.as_str()) {
                return Err(Error::DuplicateTerm(e.term.clone()));
            }
            schema.check(&e.category, e.subcategory.as_deref())?;
        }
        for c in schema.categories() {
            if !entries.iter().any(|e| &e.category == c) {
                return Err(Error::EmptyCategory(c.clone()));
            }
        }
        Ok(Self {
            entries,
            acronyms,
            schema,
        })
    }

    /// The published lexicon and acronym table.
    pub fn published() -> Self {
        let mut lex = load_lexicon(PUBLISHED_LEXICON.as_bytes()).expect("bundled lexicon loads");
        lex.acronyms = load_acronyms(PUBLISHED_ACRONYMS.as_bytes()).expect("bundled acronyms load");
        lex
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn acronyms(&self) -> &BTreeMap<String, String> {
        &self.acronyms
    }

    pub fn set_acronyms(&mut self, acronyms: BTreeMap<String, String>) {
        self.acronyms = acronyms;
    }

    pub fn get(&self, term: &str) -> Option<&LexiconEntry> {
        self.entries.iter().find(|e| e.term == term)
    }

    pub fn count(&self, category: &str, subcategory: Option<&str>) -> usize {
        self.entries
            .iter()
            .filter(|e| e.category == category && (subcategory.is_none() || e.subcategory.as_deref() == subcategory))
            .count()
    }

    /// Scoring columns in schema order; within a category the bare column
    /// (if used) precedes declared subcategories.
    pub fn columns(&self) -> Vec<CategoryKey> {
        let mut out = Vec::new();
        for c in self.schema.categories() {
            let used = |sub: Option<&str>| {
                self.entries
                    .iter()
                    .any(|e| &e.category == c && e.subcategory.as_deref() == sub)
            };
            if used(None) {
                out.push(CategoryKey {
                    category: c.clone(),
                    subcategory: None,
                });
            }
            for s in self.schema.subcategories(c) {
                if used(Some(s)) {
                    out.push(CategoryKey {
                        category: c.clone(),
                        subcategory: Some(s.clone()),
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrityRow {
    pub label: String,
    pub expected: usize,
    pub actual: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrityReport {
    pub rows: Vec<IntegrityRow>,
    pub expected_total: usize,
    pub actual_total: usize,
}

impl IntegrityReport {
    pub fn passed(&self) -> bool {
        self.expected_total == self.actual_total && self.rows.iter().all(|r| r.expected == r.actual)
    }
}

/// Compares a lexicon's counts with the published panel counts.
pub fn published_integrity(lexicon: &Lexicon) -> IntegrityReport {
    let mut rows: Vec<IntegrityRow> = PUBLISHED_COUNTS
        .iter()
        .map(|&(c, s, expected)| IntegrityRow {
            label: CategoryKey {
                category: c.into(),
                subcategory: s.map(Into::into),
            }
            .label(),
            expected,
            actual: lexicon.count(c, s),
        })
        .collect();
    rows.insert(
        3,
        IntegrityRow {
            label: HEALTH_AND_SAFETY.into(),
            expected: 227,
            actual: lexicon.count(HEALTH_AND_SAFETY, None),
        },
    );
    IntegrityReport {
        rows,
        expected_total: PUBLISHED_TOTAL,
        actual_total: lexicon.len(),
    }
}

pub const LEXICON_HEADER: [&str; 5] = ["term", "category", "subcategory", "source", "similarity"];

/// Loads a lexicon CSV. Categories are declared in order of first
/// appearance; subcategories follow the standard table.
pub fn load_lexicon<R: Read>(input: R) -> Result<Lexicon> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(input);
    if rdr.headers()?.iter().collect::<Vec<_>>() != LEXICON_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", LEXICON_HEADER.join(",")),
        });
    }
    let mut entries = Vec::new();
    let mut categories: Vec<String> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let bad = |message: String| Error::Parse { line, message };
        let category = field(1).to_owned();
        if !categories.contains(&category) {
            categories.push(category.clone());
        }
        let similarity = match field(4) {
            "" => None,
            s => Some(s.parse::<f64>().map_err(|_| bad(format!("bad similarity `{s}`")))?),
        };
        entries.push(LexiconEntry {
            term: field(0).to_owned(),
            category,
            subcategory: Some(field(2)).filter(|s| !s.is_empty()).map(Into::into),
            source: field(3).parse().map_err(|e: Error| bad(e.to_string()))?,
            similarity,
        });
    }
    Lexicon::new(entries, BTreeMap::new(), Schema::with_standard_subcategories(categories)?)
}

pub fn save_lexicon<W: Write>(lexicon: &Lexicon, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(LEXICON_HEADER)?;
    for e in &lexicon.entries {
        let sim = e.similarity.map(|s| s.to_string()).unwrap_or_default();
        let source = e.source.to_string();
        w.write_record([
            e.term.as_str(),
            e.category.as_str(),
            e.subcategory.as_deref().unwrap_or(""),
            source.as_str(),
            sim.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_acronyms<R: Read>(input: R) -> Result<BTreeMap<String, String>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["acronym", "full_spelling"] {
        return Err(Error::Parse {
            line: 1,
            message: "expected header `acronym,full_spelling`".into(),
        });
    }
    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let (a, f) = (rec.get(0).unwrap_or(""), rec.get(1).unwrap_or(""));
        if out.insert(a.to_owned(), f.to_owned()).is_some() {
            return Err(Error::Parse {
                line: i + 2,
                message: format!("duplicate acronym `{a}`"),
            });
        }
    }
    Ok(out)
}

pub fn save_acronyms<W: Write>(acronyms: &BTreeMap<String, String>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["acronym", "full_spelling"])?;
    for (a, f) in acronyms {
        w.write_record([a, f])?;
    }
    w.flush()?;
    Ok(())
}
