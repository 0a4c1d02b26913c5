//! The batch loop: classify a batch, report metrics, select queries to
//! label, grow the training pool and refit.

mod config;
mod detector;
mod drift;
mod grid;
mod labeler;
mod metrics;
mod runner;
mod snapshot;

pub use config::{RunConfig, Strategy};
pub use detector::{Detector, SvmDetector};
pub use drift::drift_monitor;
pub use grid::{grid_search_meta, tune_meta, DEFAULT_GRID_C, DEFAULT_GRID_GAMMA};
pub use labeler::{Labeler, OracleLabeler};
pub use metrics::{compute_metrics, Metrics};
pub use runner::{
    run_loop, run_loop_observed, BatchReport, LoopEvent, PendingBatch, RunState, SelectedQuery, SelectionOrigin,
    SelectionRecord, TrainingPool,
};
pub use snapshot::{Snapshot, SNAPSHOT_VERSION};
