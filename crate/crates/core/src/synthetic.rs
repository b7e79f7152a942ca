//! Deterministic synthetic corpora for tests, benchmarks and the bundled
//! mini pipeline. Nothing here resembles real filings beyond word choice.

use chrono::{Days, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document, DocumentHeader};

const FILLER: &[&str] = &[
    "the", "company", "our", "we", "and", "of", "to", "in", "for", "a", "with", "as", "on",
    "is", "are", "by", "this", "year", "continue", "program", "team", "across", "business",
    "operation", "support", "focus", "provide", "including", "other", "through", "effort",
    "these", "also", "each", "which", "more", "new", "market", "product", "customer",
    "strategy", "long-term", "value", "commitment", "initiative", "level", "region",
    "report", "annual", "2021", "global", "local", "key", "approach",
];

const VERBS: &[&str] = &[
    "promote", "maintain", "invest in", "prioritize", "monitor", "strengthen", "measure",
    "review", "expand", "encourage",
];

/// Terms that belong together; sentences draw from a single topic.
#[derive(Debug, Clone, PartialEq)]
pub struct Topic {
    pub name: String,
    /// Underscore-joined phrases are written with spaces in generated text.
    pub terms: Vec<String>,
}

fn filler_run(rng: &mut ChaCha8Rng, n: usize, out: &mut String) {
    for _ in 0..n {
        out.push(' ');
        out.push_str(FILLER.choose(rng).expect("nonempty"));
    }
}

fn push_term(out: &mut String, term: &str) {
    out.push(' ');
    out.push_str(&term.replace('_', " "));
}

/// One sentence: filler, a verb and two or three terms of one topic.
fn sentence(rng: &mut ChaCha8Rng, topic: &Topic, out: &mut String) {
    let mut s = String::from("We");
    push_term(&mut s, VERBS.choose(rng).expect("nonempty"));
    let n_terms = rng.random_range(2..=3);
    for i in 0..n_terms {
        if i > 0 {
            s.push_str(if i + 1 == n_terms { " and" } else { "," });
        }
        push_term(&mut s, topic.terms.choose(rng).map_or("value", String::as_str));
    }
    let n = rng.random_range(2..=6);
    filler_run(rng, n, &mut s);
    s.push('.');
    if !out.is_empty() {
        out.push(' ');
    }
    out.push_str(&s);
}

/// A disclosure-like body of `sentences` sentences; about a third of them
/// are pure filler.
pub fn disclosure_text(rng: &mut ChaCha8Rng, topics: &[Topic], sentences: usize) -> String {
    let mut out = String::new();
    for _ in 0..sentences {
        match topics.choose(rng) {
            Some(topic) if rng.random_bool(2.0 / 3.0) => sentence(rng, topic, &mut out),
            _ => {
                let mut s = String::from("The");
                let n = rng.random_range(6..=14);
                filler_run(rng, n, &mut s);
                s.push('.');
                if !out.is_empty() {
                    out.push(' ');
                }
                out.push_str(&s);
            }
        }
    }
    out
}

fn header(i: usize, rng: &mut ChaCha8Rng) -> DocumentHeader {
    let base = NaiveDate::from_ymd_opt(2021, 1, 1).expect("valid date");
    let filing = base + Days::new(rng.random_range(0..365));
    let fiscal = filing - Days::new(rng.random_range(30..120));
    DocumentHeader::new(
        format!("{}", 1_000_000 + i),
        format!("Synthetic Holdings {i}, Inc."),
        filing,
        fiscal,
    )
}

/// `docs` documents of 20-60 sentences each, filing dates spread over 2021.
pub fn disclosure_corpus(docs: usize, topics: &[Topic], seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let documents = (0..docs)
        .map(|i| {
            let h = header(i, &mut rng);
            let n = rng.random_range(20..=60);
            Document::new(h, disclosure_text(&mut rng, topics, n))
        })
        .collect();
    Corpus::new(documents).expect("synthetic corpus is valid")
}

/// Documents totalling at least `target_bytes` of text, each roughly
/// `doc_bytes` long, mixing `terms` into filler at a low rate.
pub fn bulk_corpus(target_bytes: usize, doc_bytes: usize, terms: &[String], seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut documents = Vec::new();
    let mut total = 0;
    while total < target_bytes {
        let h = header(documents.len(), &mut rng);
        let mut text = String::with_capacity(doc_bytes + 64);
        while text.len() < doc_bytes {
            if !terms.is_empty() && rng.random_bool(0.05) {
                push_term(&mut text, terms.choose(&mut rng).expect("nonempty"));
            } else {
                filler_run(&mut rng, 1, &mut text);
            }
            if rng.random_bool(0.08) {
                text.push('.');
            }
        }
        total += text.len();
        documents.push(Document::new(h, text));
    }
    Corpus::new(documents).expect("synthetic corpus is valid")
}

/// Token streams where `xtok` and `ytok` occur in identical contexts and
/// `ztok` in a disjoint set of contexts.
pub fn interchangeable_streams(sentences: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<String> = (0..12).map(|i| format!("alpha{i}")).collect();
    let b: Vec<String> = (0..12).map(|i| format!("beta{i}")).collect();
    (0..sentences)
        .map(|_| {
            let (ctx, center) = if rng.random_bool(0.7) {
                (&a, if rng.random_bool(0.5) { "xtok" } else { "ytok" })
            } else {
                (&b, "ztok")
            };
            let mut s: Vec<String> = (0..3).map(|_| ctx.choose(&mut rng).unwrap().clone()).collect();
            s.push(center.to_owned());
            s.extend((0..3).map(|_| ctx.choose(&mut rng).unwrap().clone()));
            s
        })
        .collect()
}

/// One topic per bundled seed list, its terms being the seeds.
pub fn seed_topics() -> Vec<Topic> {
    crate::lexicon::SeedList::published()
        .into_iter()
        .map(|l| Topic {
            name: l.category,
            terms: l.seeds,
        })
        .collect()
}

/// The 50-document fixture used by the end-to-end pipeline check; it is
/// also stored as `data/mini_corpus.txt`.
pub fn mini_corpus() -> Corpus {
    disclosure_corpus(50, &seed_topics(), 50)
}
