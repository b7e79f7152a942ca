use std::collections::HashMap;
use std::io::{Read, Write};

use super::{vocab_key, PUBLISHED_SEEDS};
use crate::error::{Error, Result};

/// Seeds of one category, underscore-joined for phrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList {
    pub category: String,
    pub seeds: Vec<String>,
}

impl SeedList {
    /// The five published seed lists.
    pub fn published() -> Vec<SeedList> {
        load_seeds(PUBLISHED_SEEDS.as_bytes()).expect("bundled seeds load")
    }

    /// Vocabulary keys of the seeds, deduplicated in order.
    pub fn keys(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.seeds {
            let k = vocab_key(s);
            if !k.is_empty() && !out.contains(&k) {
                out.push(k);
            }
        }
        out
    }
}

/// Every list nonempty and no seed key shared by two categories.
pub fn validate_seeds(lists: &[SeedList]) -> Result<()> {
    if lists.is_empty() {
        return Err(Error::invalid("no seed lists"));
    }
    let mut owner: HashMap<String, &str> = HashMap::new();
    for (i, l) in lists.iter().enumerate() {
        if lists[..i].iter().any(|p| p.category == l.category) {
            return Err(Error::invalid(format!("category `{}` listed twice", l.category)));
        }
        let keys = l.keys();
        if keys.is_empty() {
            return Err(Error::EmptyCategory(l.category.clone()));
        }
        for k in keys {
            if let Some(first) = owner.insert(k.clone(), &l.category) {
                return Err(Error::SeedInTwoCategories {
                    seed: k,
                    first: first.to_owned(),
                    second: l.category.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Reads `category,seed` rows; categories keep their first-seen order.
pub fn load_seeds<R: Read>(input: R) -> Result<Vec<SeedList>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["category", "seed"] {
        return Err(Error::Parse {
            line: 1,
            message: "expected header `category,seed`".into(),
        });
    }
    let mut lists: Vec<SeedList> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let (c, s) = (rec.get(0).unwrap_or(""), rec.get(1).unwrap_or(""));
        match lists.iter_mut().find(|l| l.category == c) {
            Some(l) => l.seeds.push(s.to_owned()),
            None => lists.push(SeedList {
                category: c.to_owned(),
                seeds: vec![s.to_owned()],
            }),
        }
    }
    validate_seeds(&lists)?;
    Ok(lists)
}

pub fn write_seeds<W: Write>(lists: &[SeedList], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["category", "seed"])?;
    for l in lists {
        for s in &l.seeds {
            w.write_record([&l.category, s])?;
        }
    }
    w.flush()?;
    Ok(())
}
