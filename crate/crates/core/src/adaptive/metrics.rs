use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Label;

/// Confusion-matrix summary with malicious as the positive class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_value: f64,
    /// Absent when the truths contain no positives.
    pub tp_rate: Option<f64>,
    /// Absent when the truths contain no negatives.
    pub fp_rate: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

/// Precision, recall, `F_beta = (1 + b^2) P R / (b^2 P + R)` and the two rates.
/// Zero denominators give 0 for P, R and F.
pub fn compute_metrics(predictions: &[Label], truths: &[Label], beta: f64) -> Result<Metrics> {
    if predictions.len() != truths.len() {
        return Err(Error::LengthMismatch(predictions.len(), truths.len()));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (p, t) in predictions.iter().zip(truths) {
        match (p, t) {
            (Label::Malicious, Label::Malicious) => tp += 1,
            (Label::Malicious, Label::Benign) => fp += 1,
            (Label::Benign, Label::Benign) => tn += 1,
            (Label::Benign, Label::Malicious) => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let b2 = beta * beta;
    let f_value = if precision == 0.0 && recall == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / (b2 * precision + recall)
    };
    Ok(Metrics {
        precision,
        recall,
        f_value,
        tp_rate: (tp + fn_ > 0).then(|| ratio(tp, tp + fn_)),
        fp_rate: (fp + tn > 0).then(|| ratio(fp, fp + tn)),
        tp,
        fp,
        tn,
        fn_,
    })
}
