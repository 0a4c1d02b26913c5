use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{RunConfig, Strategy};
use super::detector::Detector;
use super::drift::drift_monitor;
use super::labeler::Labeler;
use super::metrics::{compute_metrics, Metrics};
use crate::error::{Error, Result};
use crate::ingest::{AttackClass, Label, NormalizedQuery};
use crate::selection::{al_select, confusing_region, hybrid_select, random_select};
use crate::util::derive_seed;

/// Append-only labeled pool; the first label seen for a text wins.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<NormalizedQuery>", into = "Vec<NormalizedQuery>")]
pub struct TrainingPool {
    queries: Vec<NormalizedQuery>,
    texts: HashSet<String>,
}

impl From<Vec<NormalizedQuery>> for TrainingPool {
    fn from(queries: Vec<NormalizedQuery>) -> Self {
        let mut pool = TrainingPool::default();
        pool.append(queries);
        pool
    }
}

impl From<TrainingPool> for Vec<NormalizedQuery> {
    fn from(pool: TrainingPool) -> Self {
        pool.queries
    }
}

impl TrainingPool {
    /// Pool from labeled queries; duplicates after the first are dropped.
    pub fn new(initial: impl IntoIterator<Item = NormalizedQuery>) -> Result<Self> {
        let initial: Vec<NormalizedQuery> = initial.into_iter().collect();
        if let Some(q) = initial.iter().find(|q| q.label.is_none()) {
            return Err(Error::Config(format!("initial pool entry without label: {:?}", q.text)));
        }
        Ok(TrainingPool::from(initial))
    }

    /// Adds unseen labeled texts; returns how many were added.
    pub fn append(&mut self, items: impl IntoIterator<Item = NormalizedQuery>) -> usize {
        let before = self.queries.len();
        for q in items {
            if q.label.is_some() && !self.texts.contains(&q.text) {
                self.texts.insert(q.text.clone());
                self.queries.push(q);
            }
        }
        self.queries.len() - before
    }

    pub fn queries(&self) -> &[NormalizedQuery] {
        &self.queries
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn contains(&self, text: &str) -> bool {
        self.texts.contains(text)
    }

    pub fn count(&self, label: Label) -> usize {
        self.queries.iter().filter(|q| q.label == Some(label)).count()
    }

    /// Hex SHA-256 over the pool contents in order.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for q in &self.queries {
            let tag = match q.label {
                Some(Label::Malicious) => "M",
                Some(Label::Benign) => "B",
                None => "?",
            };
            h.update(tag.as_bytes());
            h.update((q.text.len() as u64).to_le_bytes());
            h.update(q.text.as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionOrigin {
    Suspicion,
    Exemplar,
    Uncertainty,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectedQuery {
    pub text: String,
    pub f_value: f64,
    pub origin: SelectionOrigin,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub queries: Vec<SelectedQuery>,
    pub suspicions: usize,
    pub exemplars: usize,
    pub margin_count: usize,
    pub confusing_count: usize,
    pub exemplars_requested: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub batch: u32,
    pub strategy: Strategy,
    pub batch_size: usize,
    pub metrics: Metrics,
    /// Fraction of the batch with a known label, over which metrics are computed.
    pub coverage: f64,
    pub selection: SelectionRecord,
    pub malicious_obtained: usize,
    /// Selected queries that were new to the pool.
    pub added: usize,
    pub pool_size: usize,
    pub fp_rate: Option<f64>,
    pub drift_flag: bool,
}

/// A classified batch whose selection awaits labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PendingBatch {
    pub batch: u32,
    pub predictions: Vec<Label>,
    pub truths: Vec<Option<Label>>,
    pub selected: Vec<usize>,
    pub record: SelectionRecord,
    pub pool_digest: String,
}

impl PendingBatch {
    pub fn texts(&self) -> Vec<String> {
        self.record.queries.iter().map(|q| q.text.clone()).collect()
    }
}

/// Phase boundaries of the loop, in the order they happen.
#[derive(Clone, Debug, PartialEq)]
pub enum LoopEvent {
    Trained { pool_size: usize },
    Classified { batch: u32, pool_size: usize, pool_digest: String },
    Labeled { batch: u32, count: usize },
    MetricsComputed { batch: u32, pool_size: usize, metrics: Metrics },
    PoolUpdated { batch: u32, pool_size: usize },
    Refitted { batch: u32, pool_size: usize },
}

/// Everything needed to continue a run: config, pool, current model and
/// the reports so far.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunState {
    pub config: RunConfig,
    pub pool: TrainingPool,
    pub detector: Detector,
    pub reports: Vec<BatchReport>,
}

impl RunState {
    pub fn start(config: RunConfig, initial: &[NormalizedQuery]) -> Result<Self> {
        Self::start_observed(config, initial, &mut |_| {})
    }

    pub fn start_observed(
        config: RunConfig,
        initial: &[NormalizedQuery],
        observer: &mut dyn FnMut(&LoopEvent),
    ) -> Result<Self> {
        config.validate()?;
        let pool = TrainingPool::new(initial.iter().cloned())?;
        if pool.count(Label::Malicious) == 0 || pool.count(Label::Benign) == 0 {
            return Err(Error::DegenerateLabels);
        }
        let detector = Detector::fit(pool.queries(), &config)?;
        observer(&LoopEvent::Trained { pool_size: pool.len() });
        Ok(RunState { config, pool, detector, reports: Vec::new() })
    }

    /// Classifies a batch and picks the queries to label. Does not touch the state.
    pub fn prepare(&self, batch: u32, queries: &[NormalizedQuery]) -> Result<PendingBatch> {
        let texts: Vec<&str> = queries.iter().map(|q| q.text.as_str()).collect();
        let scored = self.detector.score(&texts)?;
        let predictions = scored.f.iter().map(|&f| Label::from_decision(f)).collect();
        let seed = derive_seed(self.config.seed, "batch", batch as u64);
        let budget = self.config.effective_budget();

        let mut record = SelectionRecord::default();
        let mut picks: Vec<(usize, SelectionOrigin)> = Vec::new();
        match self.config.strategy {
            Strategy::ConstantStack | Strategy::ConstantSvm => {}
            Strategy::SvmAl => {
                record.margin_count = scored.f.iter().filter(|f| f.abs() <= 1.0).count();
                picks = al_select(&scored.f, budget.m).into_iter().map(|i| (i, SelectionOrigin::Uncertainty)).collect();
            }
            Strategy::Random => {
                picks = random_select(scored.len(), budget.m, seed)
                    .into_iter()
                    .map(|i| (i, SelectionOrigin::Random))
                    .collect();
            }
            Strategy::Hybrid | Strategy::SsOnly | Strategy::EsOnly | Strategy::AdaptiveSvm => {
                let pairs: Vec<(f64, f64)> = self.detector.training_decisions().iter().map(|d| (d.f, d.y)).collect();
                let region = confusing_region(&pairs);
                let malicious: Vec<&str> = self
                    .pool
                    .queries()
                    .iter()
                    .filter(|q| q.label == Some(Label::Malicious))
                    .map(|q| q.text.as_str())
                    .collect();
                let malicious_pool = if budget.theta.1 > 0.0 { self.detector.embed_many(&malicious)? } else { Vec::new() };
                let result =
                    hybrid_select(self.detector.kernel(), &scored, region.as_ref(), &malicious_pool, &budget, seed)?;
                record.margin_count = result.margin_count;
                record.confusing_count = result.confusing_count;
                record.exemplars_requested = result.exemplars_requested;
                picks.extend(result.suspicions.iter().map(|&i| (i, SelectionOrigin::Suspicion)));
                picks.extend(result.exemplars.iter().map(|&i| (i, SelectionOrigin::Exemplar)));
            }
        }
        record.suspicions = picks.iter().filter(|p| p.1 == SelectionOrigin::Suspicion).count();
        record.exemplars = picks.iter().filter(|p| p.1 == SelectionOrigin::Exemplar).count();
        record.queries = picks
            .iter()
            .map(|&(i, origin)| SelectedQuery { text: queries[i].text.clone(), f_value: scored.f[i], origin })
            .collect();

        Ok(PendingBatch {
            batch,
            predictions,
            truths: queries.iter().map(|q| q.label).collect(),
            selected: picks.into_iter().map(|p| p.0).collect(),
            record,
            pool_digest: self.pool.digest(),
        })
    }

    /// Applies the labels of a prepared batch: metrics, pool update, refit.
    /// Validation happens first, so on error the state is unchanged.
    pub fn commit(
        &mut self,
        pending: PendingBatch,
        labels: &[(Label, Option<AttackClass>)],
        observer: &mut dyn FnMut(&LoopEvent),
    ) -> Result<&BatchReport> {
        if labels.len() != pending.selected.len() {
            return Err(Error::LengthMismatch(pending.selected.len(), labels.len()));
        }
        if pending.pool_digest != self.pool.digest() {
            return Err(Error::Config(format!("batch {} was prepared against a different pool", pending.batch)));
        }
        let batch = pending.batch;

        let mut truths = pending.truths;
        for (&i, &(label, _)) in pending.selected.iter().zip(labels) {
            truths[i].get_or_insert(label);
        }
        let (preds, known): (Vec<Label>, Vec<Label>) =
            pending.predictions.iter().zip(&truths).filter_map(|(p, t)| t.map(|t| (*p, t))).unzip();
        let metrics = compute_metrics(&preds, &known, self.config.beta)?;
        let coverage = if truths.is_empty() { 0.0 } else { known.len() as f64 / truths.len() as f64 };
        observer(&LoopEvent::MetricsComputed { batch, pool_size: self.pool.len(), metrics: metrics.clone() });

        let mut next_pool = self.pool.clone();
        let added = next_pool.append(
            pending
                .record
                .queries
                .iter()
                .zip(labels)
                .map(|(q, &(label, class))| NormalizedQuery::labeled(q.text.clone(), label, class, batch)),
        );
        let next_detector = if added > 0 && !self.config.strategy.is_constant() {
            Some(Detector::fit(next_pool.queries(), &self.config)?)
        } else {
            None
        };
        self.pool = next_pool;
        observer(&LoopEvent::PoolUpdated { batch, pool_size: self.pool.len() });
        if let Some(d) = next_detector {
            self.detector = d;
            observer(&LoopEvent::Refitted { batch, pool_size: self.pool.len() });
        }

        let mut history: Vec<(u32, Option<f64>)> = self.reports.iter().map(|r| (r.batch, r.fp_rate)).collect();
        history.push((batch, metrics.fp_rate));
        let drift_flag = drift_monitor(&history, self.config.drift_factor).last().is_some_and(|f| f.1);
        self.reports.push(BatchReport {
            batch,
            strategy: self.config.strategy,
            batch_size: truths.len(),
            fp_rate: metrics.fp_rate,
            metrics,
            coverage,
            malicious_obtained: labels.iter().filter(|l| l.0 == Label::Malicious).count(),
            selection: pending.record,
            added,
            pool_size: self.pool.len(),
            drift_flag,
        });
        Ok(self.reports.last().expect("just pushed"))
    }

    /// One full batch: classify, select, label, commit.
    pub fn step(
        &mut self,
        batch: u32,
        queries: &[NormalizedQuery],
        labeler: &mut dyn Labeler,
        observer: &mut dyn FnMut(&LoopEvent),
    ) -> Result<&BatchReport> {
        let pending = self.prepare(batch, queries)?;
        observer(&LoopEvent::Classified { batch, pool_size: self.pool.len(), pool_digest: pending.pool_digest.clone() });
        let texts = pending.texts();
        let labels = labeler.label(&texts)?;
        if labels.len() != texts.len() {
            return Err(Error::LabelerUnavailable(format!(
                "labeler answered {} of {} queries",
                labels.len(),
                texts.len()
            )));
        }
        observer(&LoopEvent::Labeled { batch, count: labels.len() });
        self.commit(pending, &labels, observer)
    }
}

/// Trains on the initial pool and runs every batch in order.
pub fn run_loop(
    config: RunConfig,
    initial: &[NormalizedQuery],
    batches: &[(u32, Vec<NormalizedQuery>)],
    labeler: &mut dyn Labeler,
) -> Result<Vec<BatchReport>> {
    run_loop_observed(config, initial, batches, labeler, &mut |_| {})
}

pub fn run_loop_observed(
    config: RunConfig,
    initial: &[NormalizedQuery],
    batches: &[(u32, Vec<NormalizedQuery>)],
    labeler: &mut dyn Labeler,
    observer: &mut dyn FnMut(&LoopEvent),
) -> Result<Vec<BatchReport>> {
    if batches.is_empty() {
        return Err(Error::Config("no batches to run".into()));
    }
    let mut state = RunState::start_observed(config, initial, observer)?;
    for (id, queries) in batches {
        state.step(*id, queries, labeler, observer)?;
    }
    Ok(state.reports)
}
