//! Sentence datasets for an external classifier and evaluation of its
//! probability outputs.

mod metrics;
mod sentences;

pub use metrics::{evaluate, select_threshold, EvalResult, ThresholdChoice};
pub use sentences::split_sentences;

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::Document;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Hc,
    NonHc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Hc => "hc",
            Label::NonHc => "non_hc",
        })
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledSentence {
    pub id: String,
    pub split: Split,
    pub label: Label,
    pub source_doc: String,
    pub text: String,
}

/// A candidate negative sentence and the document it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolSentence {
    pub source_doc: String,
    pub text: String,
}

/// Every sentence of the given documents, tagged with the document id.
pub fn document_sentences(docs: &[Document]) -> Vec<PoolSentence> {
    docs.iter()
        .flat_map(|d| {
            split_sentences(&d.text).into_iter().map(|text| PoolSentence {
                source_doc: d.id().to_owned(),
                text,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatasetOptions {
    pub neg_ratio: usize,
    pub train_frac: f64,
    pub seed: u64,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self {
            neg_ratio: 2,
            train_frac: 0.8,
            seed: 0,
        }
    }
}

/// All sentences of `hc_docs` as positives plus `neg_ratio` times as many
/// negatives drawn without replacement from `pool`. Each class is shuffled
/// and split separately, `round(n * train_frac)` of it going to train.
pub fn build_dataset(
    hc_docs: &[Document],
    pool: &[PoolSentence],
    options: &DatasetOptions,
) -> Result<Vec<LabeledSentence>> {
    if !(0.0..=1.0).contains(&options.train_frac) {
        return Err(Error::invalid("train_frac must lie in [0, 1]"));
    }
    let positives = document_sentences(hc_docs);
    let required = positives.len() * options.neg_ratio;
    if pool.len() < required {
        return Err(Error::InsufficientPool {
            required,
            available: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let negatives: Vec<PoolSentence> = index::sample(&mut rng, pool.len(), required)
        .into_iter()
        .map(|i| pool[i].clone())
        .collect();
    let mut out = Vec::with_capacity(positives.len() + negatives.len());
    for (label, mut items) in [(Label::Hc, positives), (Label::NonHc, negatives)] {
        items.shuffle(&mut rng);
        let n_train = (items.len() as f64 * options.train_frac).round() as usize;
        for (i, s) in items.into_iter().enumerate() {
            out.push(LabeledSentence {
                id: format!("s{:07}", out.len() + 1),
                split: if i < n_train { Split::Train } else { Split::Test },
                label,
                source_doc: s.source_doc,
                text: s.text,
            });
        }
    }
    Ok(out)
}

const DATASET_HEADER: [&str; 5] = ["id", "split", "label", "source_doc", "text"];

pub fn write_dataset<W: Write>(rows: &[LabeledSentence], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(DATASET_HEADER)?;
    for r in rows {
        w.write_record([&r.id, &r.split.to_string(), &r.label.to_string(), &r.source_doc, &r.text])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset<R: Read>(input: R) -> Result<Vec<LabeledSentence>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().collect::<Vec<_>>() != DATASET_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", DATASET_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |m: &str| Error::Parse {
            line: i + 2,
            message: m.to_owned(),
        };
        let f = |k: usize| rec.get(k).unwrap_or("");
        out.push(LabeledSentence {
            id: f(0).to_owned(),
            split: match f(1) {
                "train" => Split::Train,
                "test" => Split::Test,
                _ => return Err(bad("split must be train or test")),
            },
            label: match f(2) {
                "hc" => Label::Hc,
                "non_hc" => Label::NonHc,
                _ => return Err(bad("label must be hc or non_hc")),
            },
            source_doc: f(3).to_owned(),
            text: f(4).to_owned(),
        });
    }
    Ok(out)
}

/// Reads `id,probability` rows.
pub fn read_scores<R: Read>(input: R) -> Result<Vec<(String, f64)>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["id", "probability"] {
        return Err(Error::Parse {
            line: 1,
            message: "expected header `id,probability`".into(),
        });
    }
    rdr.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let p = rec.get(1).unwrap_or("").parse::<f64>().map_err(|_| Error::Parse {
                line: i + 2,
                message: "bad probability".into(),
            })?;
            Ok((rec.get(0).unwrap_or("").to_owned(), p))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub items: usize,
    pub default_threshold: f64,
    pub at_default: EvalResult,
    pub selected: ThresholdChoice,
}

/// Joins scores to dataset labels by id and evaluates them at 0.5 and at
/// the F1-maximizing threshold.
pub fn evaluate_scores(dataset: &[LabeledSentence], scores: &[(String, f64)]) -> Result<EvalReport> {
    let labels: HashMap<&str, Label> = dataset.iter().map(|r| (r.id.as_str(), r.label)).collect();
    let mut y = Vec::with_capacity(scores.len());
    let mut p = Vec::with_capacity(scores.len());
    for (id, prob) in scores {
        let l = labels
            .get(id.as_str())
            .ok_or_else(|| Error::invalid(format!("score for unknown sentence `{id}`")))?;
        y.push(*l == Label::Hc);
        p.push(*prob);
    }
    let selected = select_threshold(&y, &p)?;
    let preds: Vec<bool> = p.iter().map(|&x| x >= 0.5).collect();
    Ok(EvalReport {
        items: y.len(),
        default_threshold: 0.5,
        at_default: evaluate(&y, &preds)?,
        selected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::doc;

    fn fixture() -> (Vec<Document>, Vec<PoolSentence>) {
        let text: String = (0..10).map(|i| format!("We train staff {i}. ")).collect();
        let hc = vec![doc("1", &text)];
        let pool = (0..25)
            .map(|i| PoolSentence {
                source_doc: "9".into(),
                text: format!("Revenue grew {i} percent."),
            })
            .collect();
        (hc, pool)
    }

    #[test]
    fn ten_positives_twenty_negatives() {
        let (hc, pool) = fixture();
        let d = build_dataset(&hc, &pool, &DatasetOptions { seed: 5, ..Default::default() }).unwrap();
        assert_eq!(d.len(), 30);
        let count = |l: Label, s: Split| d.iter().filter(|r| r.label == l && r.split == s).count();
        assert_eq!(count(Label::Hc, Split::Train), 8);
        assert_eq!(count(Label::Hc, Split::Test), 2);
        assert_eq!(count(Label::NonHc, Split::Train), 16);
        assert_eq!(count(Label::NonHc, Split::Test), 4);
        let negs: std::collections::HashSet<&str> =
            d.iter().filter(|r| r.label == Label::NonHc).map(|r| r.text.as_str()).collect();
        assert_eq!(negs.len(), 20);
        assert_eq!(d, build_dataset(&hc, &pool, &DatasetOptions { seed: 5, ..Default::default() }).unwrap());
    }

    #[test]
    fn insufficient_pool() {
        let (hc, pool) = fixture();
        let err = build_dataset(&hc, &pool[..19], &DatasetOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientPool { required: 20, available: 19 }));
    }

    proptest::proptest! {
        #[test]
        fn split_partitions_and_tracks_fraction(
            n_sent in 1usize..40,
            ratio in 0usize..4,
            frac in 0.0f64..=1.0,
            seed in 0u64..1000,
        ) {
            let text: String = (0..n_sent).map(|i| format!("We train staff {i}. ")).collect();
            let hc = vec![doc("1", &text)];
            let pool: Vec<PoolSentence> = (0..n_sent * ratio + 3)
                .map(|i| PoolSentence { source_doc: "9".into(), text: format!("Revenue grew {i} percent.") })
                .collect();
            let opts = DatasetOptions { neg_ratio: ratio, train_frac: frac, seed };
            let d = build_dataset(&hc, &pool, &opts).unwrap();
            proptest::prop_assert_eq!(d.len(), n_sent * (1 + ratio));
            let ids: std::collections::HashSet<&str> = d.iter().map(|r| r.id.as_str()).collect();
            proptest::prop_assert_eq!(ids.len(), d.len());
            let train = d.iter().filter(|r| r.split == Split::Train).count();
            let share = train as f64 / d.len() as f64;
            proptest::prop_assert!((share - frac).abs() <= 1.0 / d.len() as f64 + 1e-12);
        }
    }

    #[test]
    fn csv_round_trip_and_report() {
        let (hc, pool) = fixture();
        let d = build_dataset(&hc, &pool, &DatasetOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_dataset(&d, &mut buf).unwrap();
        assert_eq!(read_dataset(&buf[..]).unwrap(), d);
        let scores: Vec<(String, f64)> = d
            .iter()
            .map(|r| (r.id.clone(), if r.label == Label::Hc { 0.9 } else { 0.2 }))
            .collect();
        let rep = evaluate_scores(&d, &scores).unwrap();
        assert_eq!(rep.selected.result.f1, 1.0);
        assert_eq!(rep.selected.threshold, 0.9);
        assert_eq!(rep.at_default.accuracy, 1.0);
        assert!(evaluate_scores(&d, &[("nope".into(), 0.5)]).is_err());
    }
}
