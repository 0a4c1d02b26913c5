//! Stacked generalization: three base learners from different families
//! feed out-of-fold scores to a kernel SVM meta classifier.

mod forest;
mod logistic;
mod mlp;
mod stack;

use serde::{Deserialize, Serialize};

pub use forest::{Node, RandomForest, Tree};
pub use logistic::Logistic;
pub use mlp::Mlp;
pub use stack::{
    out_of_fold_meta_features, stack_fit, stack_fit_traced, LabeledVector, OutOfFold, StackConfig, StackModel, StackTrace,
    StackedEnsemble, TrainingDecision,
};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseLearnerSpec {
    RandomForest { trees: usize, max_depth: usize, seed: u64 },
    Logistic { l2: f64, max_iter: usize },
    Mlp { hidden: Vec<usize>, learning_rate: f64, epochs: usize, seed: u64 },
}

impl BaseLearnerSpec {
    pub fn default_trio() -> Vec<BaseLearnerSpec> {
        vec![
            BaseLearnerSpec::RandomForest { trees: 50, max_depth: 12, seed: 0 },
            BaseLearnerSpec::Logistic { l2: 1e-3, max_iter: 300 },
            BaseLearnerSpec::Mlp { hidden: vec![16], learning_rate: 0.05, epochs: 40, seed: 0 },
        ]
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BaseLearnerSpec::RandomForest { trees: 0, .. } => Err(Error::Config("random forest needs >= 1 tree".into())),
            BaseLearnerSpec::Logistic { l2, .. } if *l2 < 0.0 => Err(Error::Config("l2 must be >= 0".into())),
            BaseLearnerSpec::Mlp { hidden, .. } if hidden.is_empty() || hidden.contains(&0) => {
                Err(Error::Config("MLP hidden layer sizes must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Same learner with its seed (if any) replaced by one derived from `seed`.
    pub(crate) fn reseeded(&self, seed: u64) -> BaseLearnerSpec {
        let mut spec = self.clone();
        match &mut spec {
            BaseLearnerSpec::RandomForest { seed: s, .. } | BaseLearnerSpec::Mlp { seed: s, .. } => *s ^= seed,
            BaseLearnerSpec::Logistic { .. } => {}
        }
        spec
    }
}

/// A fitted base learner. Every variant scores inputs in `[-1, 1]`,
/// positive meaning malicious.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseLearner {
    RandomForest(RandomForest),
    Logistic(Logistic),
    Mlp(Mlp),
}

impl BaseLearner {
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            BaseLearner::RandomForest(m) => m.score(x),
            BaseLearner::Logistic(m) => m.score(x),
            BaseLearner::Mlp(m) => m.score(x),
        }
    }
}

/// Fits one base learner on vectors `x` with targets `y` in `{-1, +1}`.
pub fn fit_base(spec: &BaseLearnerSpec, x: &[Vec<f64>], y: &[f64]) -> Result<BaseLearner> {
    spec.validate()?;
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::DegenerateLabels);
    }
    let dim = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
    }
    Ok(match spec {
        BaseLearnerSpec::RandomForest { trees, max_depth, seed } => {
            BaseLearner::RandomForest(RandomForest::fit(x, y, *trees, *max_depth, *seed))
        }
        BaseLearnerSpec::Logistic { l2, max_iter } => BaseLearner::Logistic(Logistic::fit(x, y, *l2, *max_iter)),
        BaseLearnerSpec::Mlp { hidden, learning_rate, epochs, seed } => {
            BaseLearner::Mlp(Mlp::fit(x, y, hidden, *learning_rate, *epochs, *seed))
        }
    })
}
