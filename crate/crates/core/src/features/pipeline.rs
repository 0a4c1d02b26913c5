use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::alphabet::Alphabet;
use super::bigram::{bigram_sparse, RAW_DIM};
use super::reduction::{fit_pca, fit_random_projection, Reduction};
use super::scoring::{score_from_counts, select_top_k, ScoringMethod};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionKind {
    Pca,
    RandomProjection,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub method: ScoringMethod,
    /// Number of top-scoring bigram dimensions kept.
    pub k: usize,
    pub reduction: ReductionKind,
    /// Output dimension after reduction.
    pub d: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { method: ScoringMethod::InformationGain, k: 800, reduction: ReductionKind::Pca, d: 80, seed: 0 }
    }
}

pub const PIPELINE_VERSION: u32 = 1;

/// Fitted text-to-vector map: bigrams, gather of the selected dimensions,
/// then an optional centered linear reduction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub version: u32,
    pub alphabet: Alphabet,
    pub selected: Vec<usize>,
    pub reduction: Option<Reduction>,
    pub scoring_method: ScoringMethod,
    /// Output dimension.
    pub d: usize,
    /// Set when PCA found fewer positive eigenvalues than `d`.
    #[serde(default)]
    pub rank_deficient: bool,
}

impl FeaturePipeline {
    /// Every bigram dimension, no reduction.
    pub fn identity() -> Self {
        FeaturePipeline {
            version: PIPELINE_VERSION,
            alphabet: Alphabet::new(),
            selected: (0..RAW_DIM).collect(),
            reduction: None,
            scoring_method: ScoringMethod::DocumentFrequency,
            d: RAW_DIM,
            rank_deficient: false,
        }
    }

    /// Fits selection and reduction on labeled texts (`true` = malicious).
    pub fn fit(texts: &[&str], positive: &[bool], config: &PipelineConfig) -> Result<Self> {
        if texts.len() != positive.len() {
            return Err(Error::LengthMismatch(texts.len(), positive.len()));
        }
        if texts.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, have: 0 });
        }
        let alphabet = Alphabet::new();
        let sparse = texts.par_iter().map(|t| bigram_sparse(t, &alphabet)).collect::<Result<Vec<_>>>()?;

        let n_pos = positive.iter().filter(|p| **p).count() as f64;
        let n_neg = texts.len() as f64 - n_pos;
        if config.method != ScoringMethod::DocumentFrequency && (n_pos == 0.0 || n_neg == 0.0) {
            return Err(Error::DegenerateLabels);
        }
        let mut present_pos = vec![0.0; RAW_DIM];
        let mut present_neg = vec![0.0; RAW_DIM];
        for (row, &pos) in sparse.iter().zip(positive) {
            let target = if pos { &mut present_pos } else { &mut present_neg };
            for &(i, _) in row {
                target[i] += 1.0;
            }
        }
        let scores = score_from_counts(&present_pos, &present_neg, n_pos, n_neg, config.method);
        let selected = select_top_k(&scores, config.k);
        if selected.is_empty() {
            return Err(Error::Config("no bigram dimension scored above zero".into()));
        }

        let mut pipeline = FeaturePipeline {
            version: PIPELINE_VERSION,
            alphabet,
            d: selected.len(),
            selected,
            reduction: None,
            scoring_method: config.method,
            rank_deficient: false,
        };
        let d = config.d.min(pipeline.selected.len());
        match config.reduction {
            ReductionKind::None => {}
            ReductionKind::Pca => {
                let gathered: Vec<Vec<f64>> = sparse.iter().map(|row| pipeline.gather_sparse(row)).collect();
                let fit = fit_pca(&gathered, d)?;
                pipeline.rank_deficient = fit.rank_deficient;
                pipeline.reduction = Some(fit.reduction);
                pipeline.d = d;
            }
            ReductionKind::RandomProjection => {
                pipeline.reduction = Some(fit_random_projection(pipeline.selected.len(), d, config.seed)?);
                pipeline.d = d;
            }
        }
        Ok(pipeline)
    }

    fn gather_sparse(&self, row: &[(usize, f64)]) -> Vec<f64> {
        let mut out = vec![0.0; self.selected.len()];
        for &(i, v) in row {
            if let Ok(pos) = self.selected.binary_search(&i) {
                out[pos] = v;
            }
        }
        out
    }

    pub fn transform(&self, text: &str) -> Result<Vec<f64>> {
        let row = bigram_sparse(text, &self.alphabet)?;
        let gathered = self.gather_sparse(&row);
        match &self.reduction {
            Some(r) => r.apply(&gathered),
            None => Ok(gathered),
        }
    }

    pub fn transform_many(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>> {
        texts.par_iter().map(|t| self.transform(t)).collect()
    }
}
