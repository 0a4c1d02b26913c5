use serde::{Deserialize, Serialize};

use crate::ensemble::{BaseLearnerSpec, StackConfig};
use crate::error::{Error, Result};
use crate::features::PipelineConfig;
use crate::selection::SelectionBudget;
use crate::svm::SvmParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Stacked model, suspicion plus exemplar selection.
    Hybrid,
    /// Hybrid with theta forced to 1:0.
    SsOnly,
    /// Hybrid with theta forced to 0:1.
    EsOnly,
    /// Stacked model, uncertainty sampling inside the margin.
    #[serde(alias = "al")]
    SvmAl,
    /// Stacked model, uniform random selection.
    Random,
    /// Stacked model trained once on the initial pool.
    ConstantStack,
    /// Bare SVM trained once on the initial pool.
    ConstantSvm,
    /// Bare SVM with hybrid selection.
    AdaptiveSvm,
}

impl Strategy {
    pub const ALL: [Strategy; 8] = [
        Strategy::Hybrid,
        Strategy::SsOnly,
        Strategy::EsOnly,
        Strategy::SvmAl,
        Strategy::Random,
        Strategy::ConstantStack,
        Strategy::ConstantSvm,
        Strategy::AdaptiveSvm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Hybrid => "hybrid",
            Strategy::SsOnly => "ss_only",
            Strategy::EsOnly => "es_only",
            Strategy::SvmAl => "svm_al",
            Strategy::Random => "random",
            Strategy::ConstantStack => "constant_stack",
            Strategy::ConstantSvm => "constant_svm",
            Strategy::AdaptiveSvm => "adaptive_svm",
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        if s == "al" {
            return Some(Strategy::SvmAl);
        }
        Strategy::ALL.into_iter().find(|st| st.name() == s)
    }

    pub fn is_constant(self) -> bool {
        matches!(self, Strategy::ConstantStack | Strategy::ConstantSvm)
    }

    pub fn uses_stack(self) -> bool {
        !matches!(self, Strategy::ConstantSvm | Strategy::AdaptiveSvm)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub strategy: Strategy,
    pub budget: SelectionBudget,
    pub pipeline: PipelineConfig,
    /// Meta classifier of the stack, or the whole model for the bare-SVM strategies.
    pub meta: SvmParams,
    pub bases: Vec<BaseLearnerSpec>,
    pub k_folds: usize,
    pub seed: u64,
    /// Batch ids to process in order; empty means every batch in the corpus.
    pub batches: Vec<u32>,
    pub beta: f64,
    pub drift_factor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            strategy: Strategy::Hybrid,
            budget: SelectionBudget::default(),
            pipeline: PipelineConfig::default(),
            meta: SvmParams::default(),
            bases: BaseLearnerSpec::default_trio(),
            k_folds: 5,
            seed: 0,
            batches: Vec::new(),
            beta: 1.0,
            drift_factor: 3.0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        self.meta.kernel.validate()?;
        if !(self.meta.c > 0.0) {
            return Err(Error::Config(format!("C must be positive, got {}", self.meta.c)));
        }
        for b in &self.bases {
            b.validate()?;
        }
        if self.strategy.uses_stack() && (self.k_folds < 2 || self.bases.is_empty()) {
            return Err(Error::Config("stacking needs k_folds >= 2 and at least one base learner".into()));
        }
        if self.pipeline.k == 0 || self.pipeline.d == 0 {
            return Err(Error::Config("pipeline k and d must be >= 1".into()));
        }
        if !(self.beta > 0.0) || !(self.drift_factor > 0.0) {
            return Err(Error::Config("beta and drift_factor must be positive".into()));
        }
        Ok(())
    }

    pub fn stack_config(&self) -> StackConfig {
        StackConfig { bases: self.bases.clone(), meta: self.meta.clone(), k_folds: self.k_folds, seed: self.seed }
    }

    /// Budget with theta overridden for the single-subset strategies.
    pub fn effective_budget(&self) -> SelectionBudget {
        match self.strategy {
            Strategy::SsOnly => SelectionBudget { theta: (1.0, 0.0), ..self.budget },
            Strategy::EsOnly => SelectionBudget { theta: (0.0, 1.0), ..self.budget },
            _ => self.budget,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(Strategy::parse(s.name()), Some(s));
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(serde_json::from_str::<Strategy>(&json).unwrap(), s);
        }
        assert_eq!(Strategy::parse("AL"), Some(Strategy::SvmAl));
        assert_eq!(Strategy::parse("ss-only"), Some(Strategy::SsOnly));
        assert_eq!(Strategy::parse("bogus"), None);
    }

    #[test]
    fn defaults_validate_and_partial_json_fills_in() {
        RunConfig::default().validate().unwrap();
        let c: RunConfig = serde_json::from_str(r#"{"strategy": "random", "seed": 9}"#).unwrap();
        assert_eq!(c.strategy, Strategy::Random);
        assert_eq!(c.budget.m, 150);
        assert_eq!(c.meta.c, 0.05);
    }

    #[test]
    fn degenerate_theta_overrides() {
        let c = RunConfig { strategy: Strategy::SsOnly, ..Default::default() };
        assert_eq!(c.effective_budget().theta, (1.0, 0.0));
        let c = RunConfig { strategy: Strategy::EsOnly, ..Default::default() };
        assert_eq!(c.effective_budget().theta, (0.0, 1.0));
    }
}
