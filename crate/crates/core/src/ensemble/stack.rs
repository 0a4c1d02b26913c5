use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_base, BaseLearner, BaseLearnerSpec};
use crate::error::{Error, Result};
use crate::features::FeaturePipeline;
use crate::ingest::Label;
use crate::svm::{train_svm, SvmModel, SvmParams, TrainingSet};
use crate::util::{derive_seed, text_key};

/// A feature vector with a stable identity (the query text) and a `{-1, +1}` target.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledVector {
    pub id: String,
    pub x: Vec<f64>,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StackConfig {
    pub bases: Vec<BaseLearnerSpec>,
    pub meta: SvmParams,
    pub k_folds: usize,
    pub seed: u64,
}

impl Default for StackConfig {
    fn default() -> Self {
        StackConfig { bases: BaseLearnerSpec::default_trio(), meta: SvmParams::default(), k_folds: 5, seed: 0 }
    }
}

/// Meta decision value and target of one training sample, computed on the
/// out-of-fold meta features the meta SVM was trained on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingDecision {
    pub f: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackedEnsemble {
    pub specs: Vec<BaseLearnerSpec>,
    /// Base learners refitted on the full pool.
    pub bases: Vec<BaseLearner>,
    pub meta: SvmModel,
    pub folds: usize,
    pub seed: u64,
    pub training_decisions: Vec<TrainingDecision>,
}

impl StackedEnsemble {
    /// One score per base learner: the meta SVM's input space.
    pub fn meta_features(&self, x: &[f64]) -> Vec<f64> {
        self.bases.iter().map(|b| b.score(x)).collect()
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.meta.decision_value(&self.meta_features(x)).expect("meta SVM input has one entry per base")
    }
}

/// Which samples each out-of-fold base fit saw and which fold produced each
/// sample's meta features.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StackTrace {
    pub fold_of: BTreeMap<String, usize>,
    pub fold_training_ids: Vec<Vec<String>>,
    pub meta_feature_source: BTreeMap<String, usize>,
}

pub fn stack_fit(pool: &[LabeledVector], config: &StackConfig) -> Result<StackedEnsemble> {
    stack_fit_traced(pool, config).map(|(m, _)| m)
}

/// Base-learner scores of every pool sample, each produced by a fit that
/// never saw that sample. Rows are in canonical (seeded, order-independent)
/// sample order.
#[derive(Clone, Debug, PartialEq)]
pub struct OutOfFold {
    pub ids: Vec<String>,
    pub y: Vec<f64>,
    pub fold: Vec<usize>,
    pub meta_x: Vec<Vec<f64>>,
    pub fold_training_ids: Vec<Vec<String>>,
}

fn check_pool(pool: &[LabeledVector], config: &StackConfig) -> Result<()> {
    let k = config.k_folds;
    if k < 2 {
        return Err(Error::Config("stacking needs at least 2 folds".into()));
    }
    if config.bases.is_empty() {
        return Err(Error::Config("stacking needs at least one base learner".into()));
    }
    if pool.len() < k {
        return Err(Error::TooFewSamples { needed: k, have: pool.len() });
    }
    let mut ids = HashSet::new();
    if let Some(dup) = pool.iter().find(|s| !ids.insert(s.id.as_str())) {
        return Err(Error::Config(format!("duplicate sample id {:?}", dup.id)));
    }
    let n_pos = pool.iter().filter(|s| s.y > 0.0).count();
    let n_neg = pool.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateLabels);
    }
    if n_pos.min(n_neg) < k {
        return Err(Error::TooFewSamples { needed: k, have: n_pos.min(n_neg) });
    }
    Ok(())
}

fn canonical_order(pool: &[LabeledVector], seed: u64) -> Vec<&LabeledVector> {
    let mut samples: Vec<&LabeledVector> = pool.iter().collect();
    samples.sort_by(|a, b| text_key(seed, &a.id).cmp(&text_key(seed, &b.id)).then(a.id.cmp(&b.id)));
    samples
}

/// Stratified folds over the canonical order: the i-th sample of each class
/// goes to fold `i mod k`.
fn assign_folds(samples: &[&LabeledVector], k: usize) -> Vec<usize> {
    let (mut pos_rank, mut neg_rank) = (0, 0);
    samples
        .iter()
        .map(|s| {
            let rank = if s.y > 0.0 { &mut pos_rank } else { &mut neg_rank };
            let f = *rank % k;
            *rank += 1;
            f
        })
        .collect()
}

pub fn out_of_fold_meta_features(pool: &[LabeledVector], config: &StackConfig) -> Result<OutOfFold> {
    check_pool(pool, config)?;
    let samples = canonical_order(pool, config.seed);
    oof_for(&samples, config)
}

fn oof_for(samples: &[&LabeledVector], config: &StackConfig) -> Result<OutOfFold> {
    let k = config.k_folds;
    let fold = assign_folds(samples, k);
    let fold_results = (0..k)
        .into_par_iter()
        .map(|f| -> Result<(Vec<(usize, Vec<f64>)>, Vec<String>)> {
            let train: Vec<usize> = (0..samples.len()).filter(|&i| fold[i] != f).collect();
            let x: Vec<Vec<f64>> = train.iter().map(|&i| samples[i].x.clone()).collect();
            let y: Vec<f64> = train.iter().map(|&i| samples[i].y).collect();
            let seed = derive_seed(config.seed, "stack-fold", f as u64);
            let bases =
                config.bases.iter().map(|s| fit_base(&s.reseeded(seed), &x, &y)).collect::<Result<Vec<_>>>()?;
            let held: Vec<(usize, Vec<f64>)> = (0..samples.len())
                .filter(|&i| fold[i] == f)
                .map(|i| (i, bases.iter().map(|b| b.score(&samples[i].x)).collect()))
                .collect();
            Ok((held, train.iter().map(|&i| samples[i].id.clone()).collect()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut meta_x = vec![Vec::new(); samples.len()];
    let mut fold_training_ids = Vec::with_capacity(k);
    for (held, train_ids) in fold_results {
        for (i, features) in held {
            meta_x[i] = features;
        }
        fold_training_ids.push(train_ids);
    }
    Ok(OutOfFold {
        ids: samples.iter().map(|s| s.id.clone()).collect(),
        y: samples.iter().map(|s| s.y).collect(),
        fold,
        meta_x,
        fold_training_ids,
    })
}

/// Out-of-fold stacking: stratified folds keyed by sample id, meta SVM on
/// out-of-fold base scores, then every base refitted on the whole pool.
pub fn stack_fit_traced(pool: &[LabeledVector], config: &StackConfig) -> Result<(StackedEnsemble, StackTrace)> {
    check_pool(pool, config)?;
    let samples = canonical_order(pool, config.seed);
    let oof = oof_for(&samples, config)?;

    let mut trace = StackTrace { fold_training_ids: oof.fold_training_ids.clone(), ..Default::default() };
    for (id, &f) in oof.ids.iter().zip(&oof.fold) {
        trace.fold_of.insert(id.clone(), f);
        trace.meta_feature_source.insert(id.clone(), f);
    }

    let meta_set = TrainingSet::new(oof.meta_x.clone(), oof.y.clone())?;
    let full_seed = derive_seed(config.seed, "stack-full", 0);
    let all_x: Vec<Vec<f64>> = samples.iter().map(|s| s.x.clone()).collect();
    let (meta, bases) = rayon::join(
        || train_svm(&meta_set, &config.meta),
        || config.bases.iter().map(|s| fit_base(&s.reseeded(full_seed), &all_x, &oof.y)).collect::<Result<Vec<_>>>(),
    );
    let meta = meta?;
    let bases = bases?;
    let training_decisions = meta
        .decision_values(&oof.meta_x)?
        .into_iter()
        .zip(&oof.y)
        .map(|(f, &y)| TrainingDecision { f, y })
        .collect();

    Ok((
        StackedEnsemble {
            specs: config.bases.clone(),
            bases,
            meta,
            folds: config.k_folds,
            seed: config.seed,
            training_decisions,
        },
        trace,
    ))
}

/// The detection model: feature pipeline plus stacked ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackModel {
    pub pipeline: FeaturePipeline,
    pub ensemble: StackedEnsemble,
}

impl StackModel {
    /// Meta-feature vector of a query (the space selection works in).
    pub fn embed(&self, text: &str) -> Result<Vec<f64>> {
        Ok(self.ensemble.meta_features(&self.pipeline.transform(text)?))
    }

    /// Label and meta decision value; `f = 0` is benign.
    pub fn predict(&self, text: &str) -> Result<(Label, f64)> {
        let f = self.ensemble.meta.decision_value(&self.embed(text)?)?;
        Ok((Label::from_decision(f), f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::KernelSpec;

    fn pool(n: usize) -> Vec<LabeledVector> {
        (0..n)
            .map(|i| {
                let y = if i % 4 == 0 { 1.0 } else { -1.0 };
                let t = i as f64;
                LabeledVector { id: format!("q{i}"), x: vec![y * 0.8 + (t * 0.7).sin() * 0.3, (t * 1.3).cos()], y }
            })
            .collect()
    }

    fn quick_config() -> StackConfig {
        StackConfig {
            bases: vec![
                BaseLearnerSpec::RandomForest { trees: 5, max_depth: 4, seed: 1 },
                BaseLearnerSpec::Logistic { l2: 1e-3, max_iter: 100 },
                BaseLearnerSpec::Mlp { hidden: vec![4], learning_rate: 0.1, epochs: 10, seed: 2 },
            ],
            meta: SvmParams { c: 1.0, kernel: KernelSpec::Rbf { gamma: 2.0 }, tol: 1e-4, max_passes: None },
            k_folds: 5,
            seed: 7,
        }
    }

    #[test]
    fn meta_features_are_three_dimensional() {
        let m = stack_fit(&pool(60), &quick_config()).unwrap();
        assert_eq!(m.meta.dim(), Some(3));
        assert_eq!(m.meta_features(&[0.1, 0.2]).len(), 3);
        assert_eq!(m.training_decisions.len(), 60);
    }

    #[test]
    fn folds_are_out_of_fold() {
        let (_, trace) = stack_fit_traced(&pool(60), &quick_config()).unwrap();
        for (id, f) in &trace.meta_feature_source {
            assert_eq!(trace.fold_of[id], *f);
            assert!(!trace.fold_training_ids[*f].contains(id));
        }
    }

    #[test]
    fn input_order_does_not_matter() {
        let p = pool(48);
        let mut rev = p.clone();
        rev.reverse();
        assert_eq!(stack_fit(&p, &quick_config()).unwrap(), stack_fit(&rev, &quick_config()).unwrap());
    }

    #[test]
    fn too_few_samples() {
        let p = pool(4);
        assert!(matches!(stack_fit(&p, &quick_config()), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut p = pool(40);
        p[1].id = p[0].id.clone();
        assert!(stack_fit(&p, &quick_config()).is_err());
    }
}
