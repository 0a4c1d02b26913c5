use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::kff::exemplar_selection;
use super::kmedoids::{farthest_point_init, kmedoids, random_init};
use crate::error::{Error, Result};
use crate::svm::KernelSpec;
use crate::util::derived_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KmedoidsInit {
    FarthestPoint,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionBudget {
    /// Queries to label per batch.
    pub m: usize,
    /// Relative sizes of the suspicion and exemplar subsets.
    pub theta: (f64, f64),
    /// Average cluster size; the cluster count is `floor(candidates / r)`.
    pub r: usize,
    pub init: KmedoidsInit,
}

impl Default for SelectionBudget {
    fn default() -> Self {
        SelectionBudget { m: 150, theta: (7.0, 3.0), r: 5, init: KmedoidsInit::FarthestPoint }
    }
}

impl SelectionBudget {
    pub fn validate(&self) -> Result<()> {
        let (ss, es) = self.theta;
        if self.m == 0 || self.r == 0 {
            return Err(Error::Config("budget M and cluster size R must be >= 1".into()));
        }
        if !(ss >= 0.0 && es >= 0.0 && ss + es > 0.0) {
            return Err(Error::Config(format!("invalid theta {ss}:{es}")));
        }
        Ok(())
    }

    /// Suspicion share of `total`, computed as `ss * total / (ss + es)`.
    fn ss_share_of(&self, total: usize) -> f64 {
        self.theta.0 * total as f64 / (self.theta.0 + self.theta.1)
    }

    /// Upper bound on suspicions: the suspicion share of M, rounded up.
    pub fn suspicion_cap(&self) -> usize {
        (self.ss_share_of(self.m).ceil() as usize).min(self.m)
    }
}

/// Decision-value band spanned by misclassified training queries inside the margin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfusingRegion {
    pub f_lower: f64,
    pub f_upper: f64,
}

impl ConfusingRegion {
    pub fn contains(&self, f: f64) -> bool {
        self.f_lower <= f && f <= self.f_upper
    }
}

/// Region from `(f, y)` pairs of training queries; `None` when no training
/// query is both misclassified and inside the margin.
pub fn confusing_region(training: &[(f64, f64)]) -> Option<ConfusingRegion> {
    training.iter().filter(|(f, y)| y * f < 0.0 && f.abs() <= 1.0).fold(None, |acc, &(f, _)| match acc {
        None => Some(ConfusingRegion { f_lower: f, f_upper: f }),
        Some(r) => Some(ConfusingRegion { f_lower: r.f_lower.min(f), f_upper: r.f_upper.max(f) }),
    })
}

/// Unknown queries as seen by the detector: meta-space embeddings and decision values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoredBatch {
    pub embeddings: Vec<Vec<f64>>,
    pub f: Vec<f64>,
}

impl ScoredBatch {
    pub fn new(embeddings: Vec<Vec<f64>>, f: Vec<f64>) -> Result<Self> {
        if embeddings.len() != f.len() {
            return Err(Error::LengthMismatch(embeddings.len(), f.len()));
        }
        Ok(ScoredBatch { embeddings, f })
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }
}

/// Per-batch selection outcome; indices refer to the scored batch.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub suspicions: Vec<usize>,
    pub exemplars: Vec<usize>,
    /// Unknown queries inside the margin (of the suspicion subset, for hybrid strategies).
    pub margin_count: usize,
    /// Unknown queries inside the confusing region.
    pub confusing_count: usize,
    pub exemplars_requested: usize,
}

impl SelectionResult {
    pub fn all(&self) -> impl Iterator<Item = usize> + '_ {
        self.suspicions.iter().chain(&self.exemplars).copied()
    }

    pub fn len(&self) -> usize {
        self.suspicions.len() + self.exemplars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Suspicions among `subset`: members whose f lies in the region, reduced to
/// `floor(count / r)` K-medoids centers (or returned verbatim when that is 0),
/// never more than `cap`. Returns `(suspicions, confusing_count)`.
#[allow(clippy::too_many_arguments)]
pub fn suspicion_selection(
    kernel: &KernelSpec,
    batch: &ScoredBatch,
    subset: &[usize],
    region: &ConfusingRegion,
    r: usize,
    cap: usize,
    init: KmedoidsInit,
    seed: u64,
) -> (Vec<usize>, usize) {
    let candidates: Vec<usize> = subset.iter().copied().filter(|&i| region.contains(batch.f[i])).collect();
    let k = (candidates.len() / r.max(1)).min(cap);
    if k == 0 {
        let mut verbatim = candidates.clone();
        verbatim.truncate(cap);
        return (verbatim, candidates.len());
    }
    let dist: Vec<Vec<f64>> = candidates
        .iter()
        .map(|&a| candidates.iter().map(|&b| kernel.distance_unchecked(&batch.embeddings[a], &batch.embeddings[b])).collect())
        .collect();
    let mut rng = derived_rng(seed, "kmedoids-init", 0);
    let initial = match init {
        KmedoidsInit::FarthestPoint => farthest_point_init(&dist, k, &mut rng),
        KmedoidsInit::Random => random_init(candidates.len(), k, &mut rng),
    };
    let result = kmedoids(&dist, initial);
    (result.medoids.iter().map(|&m| candidates[m]).collect(), candidates.len())
}

/// Seeded split of `0..n` into suspicion and exemplar subsets sized by theta.
fn split_batch(n: usize, budget: &SelectionBudget, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut derived_rng(seed, "hybrid-split", 0));
    let n_ss = budget.ss_share_of(n).round() as usize;
    let es = order.split_off(n_ss.min(n));
    (order, es)
}

/// Hybrid selection: suspicions from one subset, then exemplars from the
/// other to fill the remaining budget.
pub fn hybrid_select(
    kernel: &KernelSpec,
    batch: &ScoredBatch,
    region: Option<&ConfusingRegion>,
    malicious_pool: &[Vec<f64>],
    budget: &SelectionBudget,
    seed: u64,
) -> Result<SelectionResult> {
    budget.validate()?;
    let (ss_subset, es_subset) = split_batch(batch.len(), budget, seed);
    let margin_count = ss_subset.iter().filter(|&&i| batch.f[i].abs() <= 1.0).count();

    let (suspicions, confusing_count) = match region {
        Some(region) if !ss_subset.is_empty() => suspicion_selection(
            kernel,
            batch,
            &ss_subset,
            region,
            budget.r,
            budget.suspicion_cap(),
            budget.init,
            seed,
        ),
        _ => (Vec::new(), 0),
    };

    let requested = budget.m - suspicions.len();
    let candidates: Vec<(&[f64], f64)> =
        es_subset.iter().map(|&i| (batch.embeddings[i].as_slice(), batch.f[i])).collect();
    let malicious: Vec<&[f64]> = malicious_pool.iter().map(Vec::as_slice).collect();
    let exemplars =
        exemplar_selection(kernel, &candidates, &malicious, requested).into_iter().map(|c| es_subset[c]).collect();

    Ok(SelectionResult { suspicions, exemplars, margin_count, confusing_count, exemplars_requested: requested })
}

/// Uncertainty sampling: up to `m` in-margin queries by ascending `|f|`.
pub fn al_select(f: &[f64], m: usize) -> Vec<usize> {
    let mut inside: Vec<usize> = (0..f.len()).filter(|&i| f[i].abs() <= 1.0).collect();
    inside.sort_by(|&a, &b| f[a].abs().total_cmp(&f[b].abs()).then(a.cmp(&b)));
    inside.truncate(m);
    inside
}

/// Uniform sample without replacement of `min(m, n)` indices, in shuffled order.
pub fn random_select(n: usize, m: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut derived_rng(seed, "random-select", 0));
    order.truncate(m);
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_examples() {
        assert_eq!(confusing_region(&[(0.5, 1.0), (-2.0, 1.0), (1.5, -1.0)]), None);
        assert_eq!(
            confusing_region(&[(-0.3, 1.0), (0.7, -1.0), (0.9, 1.0)]),
            Some(ConfusingRegion { f_lower: -0.3, f_upper: 0.7 })
        );
        assert_eq!(confusing_region(&[(-0.2, 1.0)]), Some(ConfusingRegion { f_lower: -0.2, f_upper: -0.2 }));
    }

    #[test]
    fn fewer_than_r_candidates_returned_verbatim() {
        let batch = ScoredBatch::new(vec![vec![0.0]; 5], vec![0.1, 0.2, 0.3, 2.0, -2.0]).unwrap();
        let region = ConfusingRegion { f_lower: 0.0, f_upper: 0.5 };
        let (s, conf) = suspicion_selection(
            &KernelSpec::Rbf { gamma: 2.0 },
            &batch,
            &[0, 1, 2, 3, 4],
            &region,
            5,
            105,
            KmedoidsInit::FarthestPoint,
            0,
        );
        assert_eq!(s, vec![0, 1, 2]);
        assert_eq!(conf, 3);
    }

    #[test]
    fn al_examples() {
        assert_eq!(al_select(&[0.9, -1.5, 0.1], 2), vec![2, 0]);
        assert!(al_select(&[0.1, 0.2], 0).is_empty());
        let f: Vec<f64> = (0..100).map(|i| if i < 40 { 0.5 } else { 3.0 }).collect();
        assert_eq!(al_select(&f, 150).len(), 40);
    }

    #[test]
    fn random_examples() {
        let all = random_select(10, 10, 3);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
        assert_eq!(random_select(100, 7, 9), random_select(100, 7, 9));
        assert_eq!(random_select(3, 10, 1).len(), 3);
    }

    #[test]
    fn no_region_means_all_exemplars() {
        let n = 40;
        let emb: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / 40.0]).collect();
        let f = vec![0.5; n];
        let batch = ScoredBatch::new(emb, f).unwrap();
        let budget = SelectionBudget { m: 10, ..Default::default() };
        let r = hybrid_select(&KernelSpec::Rbf { gamma: 2.0 }, &batch, None, &[], &budget, 1).unwrap();
        assert!(r.suspicions.is_empty());
        assert_eq!(r.exemplars_requested, 10);
        assert_eq!(r.exemplars.len(), 10);
    }

    #[test]
    fn budget_validation_and_cap() {
        assert!(SelectionBudget { theta: (0.0, 0.0), ..Default::default() }.validate().is_err());
        assert!(SelectionBudget { m: 0, ..Default::default() }.validate().is_err());
        assert_eq!(SelectionBudget::default().suspicion_cap(), 105);
        assert_eq!(SelectionBudget { theta: (1.0, 0.0), ..Default::default() }.suspicion_cap(), 150);
        assert_eq!(SelectionBudget { theta: (0.0, 1.0), ..Default::default() }.suspicion_cap(), 0);
    }
}
