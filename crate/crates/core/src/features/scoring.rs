//! Supervised scoring of bigram dimensions on presence (value > 0) versus class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoringMethod {
    #[serde(rename = "ig")]
    InformationGain,
    #[serde(rename = "chi2")]
    ChiSquare,
    #[serde(rename = "df")]
    DocumentFrequency,
}

/// 2x2 presence/class contingency counts for one dimension.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Contingency {
    /// present and positive
    pub a: f64,
    /// present and negative
    pub b: f64,
    /// absent and positive
    pub c: f64,
    /// absent and negative
    pub d: f64,
}

fn entropy2(p: f64, q: f64) -> f64 {
    let n = p + q;
    if n <= 0.0 {
        return 0.0;
    }
    [p, q].iter().filter(|&&x| x > 0.0).map(|&x| -(x / n) * (x / n).log2()).sum()
}

impl Contingency {
    fn n(&self) -> f64 {
        self.a + self.b + self.c + self.d
    }

    /// Information gain in bits.
    pub fn information_gain(&self) -> f64 {
        let n = self.n();
        let h_class = entropy2(self.a + self.c, self.b + self.d);
        let present = self.a + self.b;
        let absent = self.c + self.d;
        let h_cond = present / n * entropy2(self.a, self.b) + absent / n * entropy2(self.c, self.d);
        (h_class - h_cond).max(0.0)
    }

    pub fn chi_square(&self) -> f64 {
        let denom = (self.a + self.b) * (self.c + self.d) * (self.a + self.c) * (self.b + self.d);
        if denom == 0.0 {
            return 0.0;
        }
        let diff = self.a * self.d - self.b * self.c;
        self.n() * diff * diff / denom
    }
}

/// Scores every dimension of `x` (one row per sample) against binary labels
/// (`true` = positive class). Dimensions absent from every sample score 0.
pub fn score_features(x: &[Vec<f64>], positive: &[bool], method: ScoringMethod) -> Result<Vec<f64>> {
    if x.len() != positive.len() {
        return Err(Error::LengthMismatch(x.len(), positive.len()));
    }
    let Some(first) = x.first() else {
        return Err(Error::TooFewSamples { needed: 1, have: 0 });
    };
    let dim = first.len();
    if let Some(bad) = x.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
    }
    let n_pos = positive.iter().filter(|p| **p).count() as f64;
    let n_neg = positive.len() as f64 - n_pos;
    if method != ScoringMethod::DocumentFrequency && (n_pos == 0.0 || n_neg == 0.0) {
        return Err(Error::DegenerateLabels);
    }

    let mut present_pos = vec![0.0; dim];
    let mut present_neg = vec![0.0; dim];
    for (row, &pos) in x.iter().zip(positive) {
        let target = if pos { &mut present_pos } else { &mut present_neg };
        for (j, v) in row.iter().enumerate() {
            if *v > 0.0 {
                target[j] += 1.0;
            }
        }
    }

    Ok(score_from_counts(&present_pos, &present_neg, n_pos, n_neg, method))
}

/// Scores from per-dimension presence counts in each class.
pub(crate) fn score_from_counts(
    present_pos: &[f64],
    present_neg: &[f64],
    n_pos: f64,
    n_neg: f64,
    method: ScoringMethod,
) -> Vec<f64> {
    let n = n_pos + n_neg;
    present_pos
        .iter()
        .zip(present_neg)
        .map(|(&a, &b)| {
            let table = Contingency { a, b, c: n_pos - a, d: n_neg - b };
            if a + b == 0.0 {
                return 0.0;
            }
            match method {
                ScoringMethod::InformationGain => table.information_gain(),
                ScoringMethod::ChiSquare => table.chi_square(),
                ScoringMethod::DocumentFrequency => (a + b) / n,
            }
        })
        .collect()
}

/// Indices of the `k` highest positive scores, returned in increasing index
/// order. Ties are broken by lower index.
pub fn select_top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] > 0.0).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    order.truncate(k);
    order.sort_unstable();
    order
}
