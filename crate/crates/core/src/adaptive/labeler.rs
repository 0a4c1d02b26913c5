use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ingest::{AttackClass, Label, NormalizedQuery};

/// Supplies labels for selected queries.
pub trait Labeler {
    /// One answer per text, in order. Any error aborts the batch.
    fn label(&mut self, texts: &[String]) -> Result<Vec<(Label, Option<AttackClass>)>>;
}

/// Answers from a ground-truth map, instantly.
#[derive(Clone, Debug, Default)]
pub struct OracleLabeler {
    truth: HashMap<String, (Label, Option<AttackClass>)>,
}

impl OracleLabeler {
    pub fn new(truth: HashMap<String, (Label, Option<AttackClass>)>) -> Self {
        OracleLabeler { truth }
    }

    /// Ground truth from every labeled record.
    pub fn from_queries<'a>(queries: impl IntoIterator<Item = &'a NormalizedQuery>) -> Self {
        let truth = queries
            .into_iter()
            .filter_map(|q| q.label.map(|l| (q.text.clone(), (l, q.attack_class))))
            .collect();
        OracleLabeler { truth }
    }

    pub fn lookup(&self, text: &str) -> Result<(Label, Option<AttackClass>)> {
        self.truth.get(text).copied().ok_or_else(|| Error::MissingTruth(text.to_owned()))
    }
}

impl Labeler for OracleLabeler {
    fn label(&mut self, texts: &[String]) -> Result<Vec<(Label, Option<AttackClass>)>> {
        texts.iter().map(|t| self.lookup(t)).collect()
    }
}
