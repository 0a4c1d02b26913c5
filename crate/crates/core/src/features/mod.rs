//! Query text to dense vectors: character bigrams over a fixed alphabet,
//! supervised feature scoring, and linear dimensionality reduction.

mod alphabet;
mod bigram;
mod pipeline;
mod reduction;
mod scoring;

pub use alphabet::{Alphabet, ALPHABET_SIZE};
pub use bigram::{bigram_vector, RAW_DIM};
pub use pipeline::{FeaturePipeline, PipelineConfig, ReductionKind};
pub use reduction::{fit_pca, fit_random_projection, PcaFit, Reduction};
pub use scoring::{score_features, select_top_k, ScoringMethod};
