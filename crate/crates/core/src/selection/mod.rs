//! Choosing which unknown queries to label each batch.
//!
//! Hybrid selection splits a batch into two disjoint parts. On the first it
//! runs suspicion selection: queries whose decision value falls in the band
//! spanned by misclassified in-margin training queries are clustered with
//! K-medoids and the medoids are returned. On the second it runs exemplar
//! selection: kernel farthest-first over the malicious side of the
//! hyperplane. Uncertainty sampling and uniform random sampling are the
//! comparison baselines.

mod hybrid;
mod kff;
mod kmedoids;

pub use hybrid::{
    al_select, confusing_region, hybrid_select, random_select, suspicion_selection, ConfusingRegion, KmedoidsInit,
    ScoredBatch, SelectionBudget, SelectionResult,
};
pub use kff::exemplar_selection;
pub use kmedoids::{kmedoids, kmedoids_objective, KmedoidsResult};
