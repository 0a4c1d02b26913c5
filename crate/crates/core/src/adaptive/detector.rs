use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::ensemble::{stack_fit, LabeledVector, StackModel, TrainingDecision};
use crate::error::{Error, Result};
use crate::features::FeaturePipeline;
use crate::ingest::{Label, NormalizedQuery};
use crate::selection::ScoredBatch;
use crate::svm::{train_svm, KernelSpec, SvmModel, TrainingSet};

/// Pipeline plus a single SVM on the pipeline output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmDetector {
    pub pipeline: FeaturePipeline,
    pub svm: SvmModel,
    /// In-sample decision values of the training pool.
    pub training_decisions: Vec<TrainingDecision>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Detector {
    Stack(StackModel),
    Svm(SvmDetector),
}

fn labeled_texts(pool: &[NormalizedQuery]) -> Result<(Vec<&str>, Vec<f64>)> {
    pool.iter()
        .map(|q| match q.label {
            Some(l) => Ok((q.text.as_str(), l.sign())),
            None => Err(Error::Config(format!("unlabeled query in training pool: {:?}", q.text))),
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().unzip())
}

impl Detector {
    /// Fits pipeline and model from scratch on the pool.
    pub fn fit(pool: &[NormalizedQuery], config: &RunConfig) -> Result<Self> {
        let (texts, y) = labeled_texts(pool)?;
        let positive: Vec<bool> = y.iter().map(|&v| v > 0.0).collect();
        let pipeline = FeaturePipeline::fit(&texts, &positive, &config.pipeline)?;
        let x = pipeline.transform_many(&texts)?;
        if config.strategy.uses_stack() {
            let samples: Vec<LabeledVector> = texts
                .iter()
                .zip(x)
                .zip(&y)
                .map(|((t, x), &y)| LabeledVector { id: (*t).to_owned(), x, y })
                .collect();
            let ensemble = stack_fit(&samples, &config.stack_config())?;
            Ok(Detector::Stack(StackModel { pipeline, ensemble }))
        } else {
            let set = TrainingSet::new(x.clone(), y.clone())?;
            let svm = train_svm(&set, &config.meta)?;
            let training_decisions =
                svm.decision_values(&x)?.into_iter().zip(y).map(|(f, y)| TrainingDecision { f, y }).collect();
            Ok(Detector::Svm(SvmDetector { pipeline, svm, training_decisions }))
        }
    }

    pub fn pipeline(&self) -> &FeaturePipeline {
        match self {
            Detector::Stack(m) => &m.pipeline,
            Detector::Svm(m) => &m.pipeline,
        }
    }

    fn svm(&self) -> &SvmModel {
        match self {
            Detector::Stack(m) => &m.ensemble.meta,
            Detector::Svm(m) => &m.svm,
        }
    }

    /// Kernel of the space the decision function (and selection) lives in.
    pub fn kernel(&self) -> &KernelSpec {
        &self.svm().kernel
    }

    pub fn training_decisions(&self) -> &[TrainingDecision] {
        match self {
            Detector::Stack(m) => &m.ensemble.training_decisions,
            Detector::Svm(m) => &m.training_decisions,
        }
    }

    /// Selection-space embeddings: meta features for the stack, pipeline
    /// output for the bare SVM.
    pub fn embed_many(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        let x = self.pipeline().transform_many(texts)?;
        Ok(match self {
            Detector::Stack(m) => x.par_iter().map(|v| m.ensemble.meta_features(v)).collect(),
            Detector::Svm(_) => x,
        })
    }

    pub fn score(&self, texts: &[&str]) -> Result<ScoredBatch> {
        let embeddings = self.embed_many(texts)?;
        let f = self.svm().decision_values(&embeddings)?;
        ScoredBatch::new(embeddings, f)
    }

    pub fn predict(&self, text: &str) -> Result<(Label, f64)> {
        let f = self.score(&[text])?.f[0];
        Ok((Label::from_decision(f), f))
    }
}
