//! Adaptive detection of malicious web queries.
//!
//! The crate turns Common Log Format access logs into normalized query
//! strings, embeds them as character-bigram vectors, classifies them with a
//! stacked ensemble whose meta classifier is a soft-margin kernel SVM, and
//! grows the labeled training pool batch by batch with a hybrid
//! suspicion/exemplar selection strategy.
//!
//! Module map:
//!
//! - [`ingest`]: log parsing, cleaning, normalization, character filter.
//! - [`features`]: alphabet, bigram vectors, feature scoring and linear reduction.
//! - [`svm`]: kernels, pairwise dual solver, decision values, kernel geometry.
//! - [`ensemble`]: random forest, logistic regression, MLP and stacking.
//! - [`selection`]: K-medoids, kernel farthest-first, hybrid selection and baselines.
//! - [`adaptive`]: metrics, labelers, the batch loop, snapshots and drift tracking.
//! - [`corpus`]: seeded synthetic corpora in the shared line-delimited format.

pub mod adaptive;
pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod features;
pub mod ingest;
pub mod selection;
pub mod svm;
pub(crate) mod util;

pub use error::{Error, Result};
pub use ingest::{AttackClass, Label, NormalizedQuery};
