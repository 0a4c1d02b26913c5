//! Pairwise dual solver with maximal-violating first choice and
//! second-order gain for the second choice.

use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use super::model::{SvmModel, TrainingSet};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelSpec,
    /// KKT tolerance on the maximal violating pair.
    pub tol: f64,
    /// Cap on pair updates, in multiples of the training-set size. `None` means `10 * n`.
    pub max_passes: Option<usize>,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 0.05, kernel: KernelSpec::Rbf { gamma: 2.0 }, tol: 1e-3, max_passes: None }
    }
}

const TAU: f64 = 1e-12;
const SV_THRESHOLD: f64 = 1e-12;

struct KernelRows<'a> {
    set: &'a TrainingSet,
    kernel: KernelSpec,
    rows: Vec<Option<Vec<f64>>>,
    diag: Vec<f64>,
}

impl<'a> KernelRows<'a> {
    fn new(set: &'a TrainingSet, kernel: KernelSpec) -> Self {
        let diag = set.x().iter().map(|x| kernel.eval_unchecked(x, x)).collect();
        KernelRows { set, kernel, rows: vec![None; set.len()], diag }
    }

    fn row(&mut self, i: usize) -> &[f64] {
        if self.rows[i].is_none() {
            let xi = &self.set.x()[i];
            let row = self.set.x().iter().map(|xj| self.kernel.eval_unchecked(xi, xj)).collect();
            self.rows[i] = Some(row);
        }
        self.rows[i].as_deref().expect("row just filled")
    }
}

/// Trains a soft-margin SVM by solving the dual
/// `min 1/2 a'Qa - e'a` s.t. `0 <= a <= C`, `y'a = 0`, `Q_ij = y_i y_j K(x_i, x_j)`.
pub fn train_svm(set: &TrainingSet, params: &SvmParams) -> Result<SvmModel> {
    params.kernel.validate()?;
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::Config(format!("C must be positive, got {}", params.c)));
    }
    if !(params.tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {}", params.tol)));
    }
    let n = set.len();
    let y = set.y();
    let c = params.c;
    let max_iter = params.max_passes.unwrap_or(10 * n).max(1).saturating_mul(n);

    let mut k = KernelRows::new(set, params.kernel);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut converged = false;
    let mut gap = f64::INFINITY;

    let in_up = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] < c) || (y[t] < 0.0 && a[t] > 0.0);
    let in_low = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < c);

    while iterations < max_iter {
        // first choice: maximal violation among I_up
        let mut i = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        for t in 0..n {
            if in_up(t, &alpha) {
                let v = -y[t] * grad[t];
                if v > g_max {
                    g_max = v;
                    i = t;
                }
            }
        }
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            if in_low(t, &alpha) {
                g_min = g_min.min(-y[t] * grad[t]);
            }
        }
        gap = g_max - g_min;
        if i == usize::MAX || gap < params.tol {
            converged = true;
            break;
        }

        // second choice: largest second-order decrease among violating I_low members
        let k_ii = k.diag[i];
        let row_i = k.row(i).to_vec();
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !in_low(t, &alpha) {
                continue;
            }
            let b = g_max + y[t] * grad[t];
            if b <= 0.0 {
                continue;
            }
            let mut a = k_ii + k.diag[t] - 2.0 * row_i[t];
            if a <= 0.0 {
                a = TAU;
            }
            let gain = -(b * b) / a;
            if gain < best {
                best = gain;
                j = t;
            }
        }
        if j == usize::MAX {
            converged = true;
            break;
        }
        let row_j = k.row(j).to_vec();

        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let q_ij = y[i] * y[j] * row_i[j];
        if y[i] != y[j] {
            let mut quad = k_ii + k.diag[j] + 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = k_ii + k.diag[j] - 2.0 * q_ij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let d_i = alpha[i] - old_ai;
        let d_j = alpha[j] - old_aj;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * row_i[t] * d_i + y[j] * row_j[t] * d_j);
        }
        iterations += 1;
    }

    let rho = bias_offset(&alpha, &grad, y, c);
    let mut support_vectors = Vec::new();
    let mut coeffs = Vec::new();
    let mut support_indices = Vec::new();
    for t in 0..n {
        if alpha[t].abs() > SV_THRESHOLD {
            support_vectors.push(set.x()[t].clone());
            coeffs.push(alpha[t] * y[t]);
            support_indices.push(t);
        }
    }
    Ok(SvmModel {
        support_vectors,
        coeffs,
        support_indices,
        bias: -rho,
        kernel: params.kernel,
        c,
        kkt_gap: gap,
        iterations,
        converged,
    })
}

/// Offset `rho` (bias = -rho): mean of `y_t * grad_t` over free variables, or the
/// midpoint of the feasible interval implied by bounded ones.
fn bias_offset(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
