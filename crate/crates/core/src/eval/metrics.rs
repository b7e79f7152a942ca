use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when the metric's denominator was zero and it is reported as 0.
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
}

impl EvalResult {
    pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        let ratio = |num: u64, den: u64| if den == 0 { (0.0, true) } else { (num as f64 / den as f64, false) };
        let (precision, p_undef) = ratio(tp, tp + fp);
        let (recall, r_undef) = ratio(tp, tp + fn_);
        let (f1, f_undef) = if precision + recall == 0.0 {
            (0.0, true)
        } else {
            (2.0 * precision * recall / (precision + recall), false)
        };
        let total = tp + fp + tn + fn_;
        Self {
            tp,
            fp,
            tn,
            fn_,
            accuracy: ratio(tp + tn, total).0,
            precision,
            recall,
            f1,
            precision_undefined: p_undef,
            recall_undefined: r_undef,
            f1_undefined: f_undef,
        }
    }
}

pub fn evaluate(labels: &[bool], predictions: &[bool]) -> Result<EvalResult> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: predictions.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::invalid("nothing to evaluate"));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&l, &p) in labels.iter().zip(predictions) {
        match (l, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
            (true, false) => fn_ += 1,
        }
    }
    Ok(EvalResult::from_counts(tp, fp, tn, fn_))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdChoice {
    pub threshold: f64,
    pub result: EvalResult,
}

/// Sweeps every distinct probability plus 0 and 1, predicting positive
/// when `p >= t`, and keeps the best F1 (the higher threshold on ties).
pub fn select_threshold(labels: &[bool], probabilities: &[f64]) -> Result<ThresholdChoice> {
    if labels.len() != probabilities.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: probabilities.len(),
        });
    }
    if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    let positives = labels.iter().filter(|&&l| l).count() as u64;
    if positives == 0 {
        return Err(Error::NoPositiveLabels);
    }
    let negatives = labels.len() as u64 - positives;
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| probabilities[b].total_cmp(&probabilities[a]));
    let mut candidates: Vec<f64> = probabilities.to_vec();
    candidates.extend([0.0, 1.0]);
    candidates.sort_by(|a, b| b.total_cmp(a));
    candidates.dedup();

    // walk thresholds from high to low, admitting items with p >= t
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut next = 0;
    let mut best: Option<ThresholdChoice> = None;
    for t in candidates {
        while next < order.len() && probabilities[order[next]] >= t {
            if labels[order[next]] {
                tp += 1;
            } else {
                fp += 1;
            }
            next += 1;
        }
        let r = EvalResult::from_counts(tp, fp, negatives - fp, positives - tp);
        if best.is_none_or(|b| r.f1 > b.result.f1) {
            best = Some(ThresholdChoice { threshold: t, result: r });
        }
    }
    Ok(best.expect("candidates include 0 and 1"))
}
