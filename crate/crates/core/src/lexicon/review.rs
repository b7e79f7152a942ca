use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::Serialize;

use super::{Expansion, Lexicon, LexiconEntry, Schema, Source};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Decision {
    Accept,
    Reject,
    Reassign {
        category: String,
        subcategory: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LedgerEntry {
    pub term: String,
    pub decision: Decision,
    pub note: String,
}

/// Screening decisions keyed by term. Terms without an entry keep their
/// proposed category.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReviewLedger {
    entries: Vec<LedgerEntry>,
    index: HashMap<String, usize>,
}

impl ReviewLedger {
    pub fn new(entries: Vec<LedgerEntry>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.term.clone(), i).is_some() {
                return Err(Error::DuplicateTerm(e.term.clone()));
            }
        }
        Ok(Self { entries, index })
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn get(&self, term: &str) -> Option<&Decision> {
        self.index.get(term).map(|&i| &self.entries[i].decision)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every reassignment must target a declared category and subcategory.
    pub fn check(&self, schema: &Schema) -> Result<()> {
        for e in &self.entries {
            if let Decision::Reassign {
                category,
                subcategory,
            } = &e.decision
            {
                schema.check(category, subcategory.as_deref())?;
            }
        }
        Ok(())
    }

    /// Reads `term,decision,target_category,note`. A reassignment target is
    /// a category name, optionally followed by `/subcategory`.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        if rdr.headers()?.iter().collect::<Vec<_>>() != ["term", "decision", "target_category", "note"] {
            return Err(Error::Parse {
                line: 1,
                message: "expected header `term,decision,target_category,note`".into(),
            });
        }
        let mut entries = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let f = |k: usize| rec.get(k).unwrap_or("").trim();
            let bad = |m: String| Error::Parse { line: i + 2, message: m };
            let decision = match f(1).to_ascii_lowercase().as_str() {
                "accept" => Decision::Accept,
                "reject" => Decision::Reject,
                "reassign" => {
                    let target = f(2);
                    if target.is_empty() {
                        return Err(bad(format!("reassign of `{}` has no target", f(0))));
                    }
                    let (category, subcategory) = match target.rsplit_once('/') {
                        Some((c, s)) => (c.to_owned(), Some(s.to_owned())),
                        None => (target.to_owned(), None),
                    };
                    Decision::Reassign {
                        category,
                        subcategory,
                    }
                }
                other => return Err(bad(format!("unknown decision `{other}`"))),
            };
            entries.push(LedgerEntry {
                term: f(0).to_owned(),
                decision,
                note: rec.get(3).unwrap_or("").to_owned(),
            });
        }
        Self::new(entries)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["term", "decision", "target_category", "note"])?;
        for e in &self.entries {
            let (d, target) = match &e.decision {
                Decision::Accept => ("accept", String::new()),
                Decision::Reject => ("reject", String::new()),
                Decision::Reassign {
                    category,
                    subcategory: None,
                } => ("reassign", category.clone()),
                Decision::Reassign {
                    category,
                    subcategory: Some(s),
                } => ("reassign", format!("{category}/{s}")),
            };
            w.write_record([e.term.as_str(), d, &target, &e.note])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReviewOutcome {
    pub lexicon: Lexicon,
    /// Ledger terms that matched nothing under review.
    pub unknown_terms: Vec<String>,
}

fn unknown_terms<'a>(ledger: &ReviewLedger, seen: impl Iterator<Item = &'a str>) -> Vec<String> {
    let seen: std::collections::HashSet<&str> = seen.collect();
    ledger
        .entries
        .iter()
        .filter(|e| !seen.contains(e.term.as_str()))
        .map(|e| e.term.clone())
        .collect()
}

/// Applies screening decisions to expansion candidates.
pub fn apply_review(expansion: &Expansion, ledger: &ReviewLedger) -> Result<ReviewOutcome> {
    let schema = Schema::with_standard_subcategories(expansion.categories.clone())?;
    ledger.check(&schema)?;
    let mut entries = Vec::new();
    for c in &expansion.candidates {
        let (category, subcategory) = match ledger.get(&c.term) {
            Some(Decision::Reject) => continue,
            Some(Decision::Reassign {
                category,
                subcategory,
            }) => (category.clone(), subcategory.clone()),
            Some(Decision::Accept) | None => (c.proposed_category.clone(), None),
        };
        entries.push(LexiconEntry {
            term: c.term.clone(),
            category,
            subcategory,
            source: c.source,
            similarity: (c.source == Source::Expanded).then_some(c.signed_best_similarity),
        });
    }
    let unknown = unknown_terms(ledger, expansion.candidates.iter().map(|c| c.term.as_str()));
    Ok(ReviewOutcome {
        lexicon: Lexicon::new(entries, BTreeMap::new(), schema)?,
        unknown_terms: unknown,
    })
}

/// Applies screening decisions to an existing lexicon.
pub fn review_lexicon(lexicon: &Lexicon, ledger: &ReviewLedger) -> Result<ReviewOutcome> {
    ledger.check(lexicon.schema())?;
    let mut entries = Vec::new();
    for e in lexicon.entries() {
        let mut e = e.clone();
        match ledger.get(&e.term) {
            Some(Decision::Reject) => continue,
            Some(Decision::Reassign {
                category,
                subcategory,
            }) => {
                e.category = category.clone();
                e.subcategory = subcategory.clone();
            }
            Some(Decision::Accept) | None => {}
        }
        entries.push(e);
    }
    let unknown = unknown_terms(ledger, lexicon.entries().iter().map(|e| e.term.as_str()));
    Ok(ReviewOutcome {
        lexicon: Lexicon::new(entries, lexicon.acronyms().clone(), lexicon.schema().clone())?,
        unknown_terms: unknown,
    })
}
