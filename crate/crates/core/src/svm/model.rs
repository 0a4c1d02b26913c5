use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::error::{Error, Result};

/// Labeled vectors with targets in `{-1, +1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl TrainingSet {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        let dim = x.first().map(Vec::len).ok_or(Error::TooFewSamples { needed: 2, have: 0 })?;
        if let Some(bad) = x.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
        if y.iter().any(|&t| t != 1.0 && t != -1.0) {
            return Err(Error::Config("SVM targets must be -1 or +1".into()));
        }
        if !(y.contains(&1.0) && y.contains(&-1.0)) {
            return Err(Error::DegenerateLabels);
        }
        Ok(TrainingSet { x, y })
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }
}

/// A trained SVM: `f(x) = sum_i coeffs[i] * K(sv_i, x) + bias`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    pub coeffs: Vec<f64>,
    /// Positions of the support vectors in the training set.
    pub support_indices: Vec<usize>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub c: f64,
    /// Final maximal KKT violation.
    pub kkt_gap: f64,
    pub iterations: usize,
    /// False when the iteration cap was reached before the KKT tolerance.
    pub converged: bool,
}

impl SvmModel {
    pub fn dim(&self) -> Option<usize> {
        self.support_vectors.first().map(Vec::len)
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if let Some(d) = self.dim() {
            if d != x.len() {
                return Err(Error::DimensionMismatch { expected: d, got: x.len() });
            }
        }
        Ok(self.decision_unchecked(x))
    }

    fn decision_unchecked(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coeffs)
            .map(|(sv, c)| c * self.kernel.eval_unchecked(sv, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn decision_values(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.par_iter().map(|x| self.decision_value(x)).collect()
    }

    /// Sign of the decision value; zero maps to -1.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(if self.decision_value(x)? > 0.0 { 1.0 } else { -1.0 })
    }
}

/// Indices of vectors inside the margin, `|f(u)| <= 1`.
pub fn margin_members(model: &SvmModel, u: &[Vec<f64>]) -> Result<Vec<usize>> {
    let f = model.decision_values(u)?;
    Ok(f.iter().enumerate().filter(|(_, v)| v.abs() <= 1.0).map(|(i, _)| i).collect())
}
