//! Soft-margin kernel SVM trained in the dual by pairwise (two-variable)
//! optimization, plus the kernel-space geometry used by selection.

mod kernel;
mod model;
mod solver;

pub use kernel::{kernel_distance, KernelSpec};
pub use model::{margin_members, SvmModel, TrainingSet};
pub use solver::{train_svm, SvmParams};
