use rayon::prelude::*;

use super::config::RunConfig;
use super::metrics::compute_metrics;
use crate::ensemble::{out_of_fold_meta_features, LabeledVector, StackConfig};
use crate::error::{Error, Result};
use crate::features::FeaturePipeline;
use crate::ingest::{Label, NormalizedQuery};
use crate::svm::{train_svm, KernelSpec, SvmParams, TrainingSet};

pub const DEFAULT_GRID_C: [f64; 6] = [0.01, 0.05, 0.1, 0.5, 1.0, 5.0];
pub const DEFAULT_GRID_GAMMA: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

/// Picks the meta SVM's `(C, gamma)` by mean F-value over stratified folds
/// of the out-of-fold meta features. Ties go to the smaller C, then the
/// smaller gamma. Folds and seed come from `stack`.
pub fn grid_search_meta(
    pool: &[LabeledVector],
    stack: &StackConfig,
    grid_c: &[f64],
    grid_gamma: &[f64],
) -> Result<(f64, f64)> {
    if grid_c.is_empty() || grid_gamma.is_empty() {
        return Err(Error::Config("empty grid".into()));
    }
    let oof = out_of_fold_meta_features(pool, stack)?;
    let k = stack.k_folds;

    let mut cells: Vec<(f64, f64)> = grid_c.iter().flat_map(|&c| grid_gamma.iter().map(move |&g| (c, g))).collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let scores = cells
        .par_iter()
        .map(|&(c, gamma)| -> Result<f64> {
            let params = SvmParams { c, kernel: KernelSpec::Rbf { gamma }, ..stack.meta.clone() };
            let mut total = 0.0;
            for f in 0..k {
                let (train, test): (Vec<usize>, Vec<usize>) = (0..oof.ids.len()).partition(|&i| oof.fold[i] != f);
                let set = TrainingSet::new(
                    train.iter().map(|&i| oof.meta_x[i].clone()).collect(),
                    train.iter().map(|&i| oof.y[i]).collect(),
                )?;
                let model = train_svm(&set, &params)?;
                let test_x: Vec<Vec<f64>> = test.iter().map(|&i| oof.meta_x[i].clone()).collect();
                let preds: Vec<Label> = model.decision_values(&test_x)?.into_iter().map(Label::from_decision).collect();
                let truths: Vec<Label> =
                    test.iter().map(|&i| if oof.y[i] > 0.0 { Label::Malicious } else { Label::Benign }).collect();
                total += compute_metrics(&preds, &truths, 1.0)?.f_value;
            }
            Ok(total / k as f64)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut best = 0;
    for i in 1..cells.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    Ok(cells[best])
}

/// Grid search on a labeled query pool: fits the pipeline from `config`,
/// then searches the meta parameters over the resulting vectors.
pub fn tune_meta(pool: &[NormalizedQuery], config: &RunConfig, grid_c: &[f64], grid_gamma: &[f64]) -> Result<(f64, f64)> {
    let labeled: Vec<(&str, Label)> = pool.iter().filter_map(|q| q.label.map(|l| (q.text.as_str(), l))).collect();
    let texts: Vec<&str> = labeled.iter().map(|p| p.0).collect();
    let positive: Vec<bool> = labeled.iter().map(|p| p.1 == Label::Malicious).collect();
    let pipeline = FeaturePipeline::fit(&texts, &positive, &config.pipeline)?;
    let samples: Vec<LabeledVector> = pipeline
        .transform_many(&texts)?
        .into_iter()
        .zip(&labeled)
        .map(|(x, (t, l))| LabeledVector { id: (*t).to_owned(), x, y: l.sign() })
        .collect();
    grid_search_meta(&samples, &config.stack_config(), grid_c, grid_gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::BaseLearnerSpec;

    fn separable(n: usize) -> Vec<LabeledVector> {
        (0..n)
            .map(|i| {
                let y = if i % 3 == 0 { 1.0 } else { -1.0 };
                let t = i as f64 * 0.37;
                LabeledVector { id: format!("s{i}"), x: vec![2.0 * y + 0.2 * t.sin(), 0.3 * t.cos()], y }
            })
            .collect()
    }

    fn config() -> StackConfig {
        StackConfig {
            bases: vec![
                BaseLearnerSpec::Logistic { l2: 1e-3, max_iter: 200 },
                BaseLearnerSpec::RandomForest { trees: 5, max_depth: 3, seed: 1 },
            ],
            k_folds: 3,
            seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn single_cell_grid() {
        assert_eq!(grid_search_meta(&separable(30), &config(), &[0.7], &[3.0]).unwrap(), (0.7, 3.0));
    }

    #[test]
    fn tiny_c_loses_to_perfect_cell() {
        // C = 1e-6 cannot move the bias off the majority class
        let best = grid_search_meta(&separable(45), &config(), &[1e-6, 1.0], &[1.0]).unwrap();
        assert_eq!(best, (1.0, 1.0));
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            grid_search_meta(&separable(4), &config(), &[1.0], &[1.0]),
            Err(Error::TooFewSamples { .. })
        ));
    }
}
