use amods::adaptive::{BatchReport, PendingBatch, RunState, SelectionOrigin};
use amods::ingest::{AttackClass, Label, NormalizedQuery};
use serde::{Deserialize, Serialize};

use crate::rundir::RunDir;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionState {
    AwaitingLabels,
    ReadyToAdvance,
    Finished,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PendingItem {
    pub query_id: String,
    pub text: String,
    pub f_value: f64,
    pub origin: SelectionOrigin,
    pub label: Option<Label>,
    pub attack_class: Option<AttackClass>,
}

#[derive(Debug, PartialEq, Eq)]
pub enum SessionError {
    WrongState(SessionState),
    UnknownQuery(String),
    Failed(String),
}

/// One labeling loop driven from outside: the current batch's selection
/// waits for labels, `advance` commits them and prepares the next batch.
pub struct Session {
    id: String,
    run: RunState,
    batches: Vec<(u32, Vec<NormalizedQuery>)>,
    next: usize,
    pending: Option<PendingBatch>,
    labels: Vec<Option<(Label, Option<AttackClass>)>>,
    rundir: Option<RunDir>,
}

impl Session {
    /// Session over `batches`, continuing `run` from its report count.
    pub fn new(
        id: String,
        run: RunState,
        batches: Vec<(u32, Vec<NormalizedQuery>)>,
        rundir: Option<RunDir>,
    ) -> Result<Self, SessionError> {
        let next = run.reports.len();
        let mut s = Session { id, run, batches, next, pending: None, labels: Vec::new(), rundir };
        s.prepare_next()?;
        Ok(s)
    }

    fn prepare_next(&mut self) -> Result<(), SessionError> {
        self.pending = None;
        self.labels.clear();
        if let Some((id, queries)) = self.batches.get(self.next) {
            let p = self.run.prepare(*id, queries).map_err(|e| SessionError::Failed(e.to_string()))?;
            self.labels = vec![None; p.selected.len()];
            self.pending = Some(p);
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn run(&self) -> &RunState {
        &self.run
    }

    pub fn state(&self) -> SessionState {
        match &self.pending {
            None => SessionState::Finished,
            Some(_) if self.labels.iter().any(Option::is_none) => SessionState::AwaitingLabels,
            Some(_) => SessionState::ReadyToAdvance,
        }
    }

    pub fn current_batch(&self) -> Option<u32> {
        self.pending.as_ref().map(|p| p.batch)
    }

    pub fn batches_total(&self) -> usize {
        self.batches.len()
    }

    pub fn remaining(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }

    fn query_id(batch: u32, index: usize) -> String {
        format!("{batch}-{index}")
    }

    pub fn pending_items(&self) -> Vec<PendingItem> {
        let Some(p) = &self.pending else { return Vec::new() };
        p.record
            .queries
            .iter()
            .zip(&self.labels)
            .enumerate()
            .map(|(i, (q, l))| PendingItem {
                query_id: Self::query_id(p.batch, i),
                text: q.text.clone(),
                f_value: q.f_value,
                origin: q.origin,
                label: l.map(|l| l.0),
                attack_class: l.and_then(|l| l.1),
            })
            .collect()
    }

    /// Records labels; all ids are checked before any is applied.
    pub fn submit(&mut self, labels: &[(String, Label, Option<AttackClass>)]) -> Result<usize, SessionError> {
        let state = self.state();
        if state != SessionState::AwaitingLabels {
            return Err(SessionError::WrongState(state));
        }
        let batch = self.current_batch().expect("awaiting labels implies a batch");
        let n = self.labels.len();
        let index_of = |qid: &str| -> Option<usize> {
            let (b, i) = qid.split_once('-')?;
            let i: usize = i.parse().ok()?;
            (b.parse::<u32>().ok()? == batch && i < n).then_some(i)
        };
        let resolved = labels
            .iter()
            .map(|(qid, label, class)| {
                index_of(qid).map(|i| (i, *label, *class)).ok_or_else(|| SessionError::UnknownQuery(qid.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (i, label, class) in resolved {
            let class = if label == Label::Malicious { class } else { None };
            self.labels[i] = Some((label, class));
        }
        Ok(self.remaining())
    }

    /// Commits the labeled batch, persists it and prepares the next one.
    pub fn advance(&mut self) -> Result<BatchReport, SessionError> {
        let state = self.state();
        if state != SessionState::ReadyToAdvance {
            return Err(SessionError::WrongState(state));
        }
        let pending = self.pending.clone().expect("ready implies a batch");
        let labels: Vec<(Label, Option<AttackClass>)> = self.labels.iter().map(|l| l.expect("all labeled")).collect();
        let report = self
            .run
            .commit(pending, &labels, &mut |_| {})
            .map_err(|e| SessionError::Failed(e.to_string()))?
            .clone();
        if let Some(dir) = &self.rundir {
            dir.record_batch(&self.run, &report).map_err(|e| SessionError::Failed(format!("{e:#}")))?;
        }
        self.next += 1;
        self.prepare_next()?;
        Ok(report)
    }

    pub fn report(&self, batch: u32) -> Option<&BatchReport> {
        self.run.reports.iter().find(|r| r.batch == batch)
    }
}
