//! Linear reductions applied after feature selection: PCA and random projection.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::derived_rng;

/// `y = (x - center) * matrix`, with `matrix` stored row-major as `inputs x outputs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub inputs: usize,
    pub outputs: usize,
    pub center: Vec<f64>,
    pub matrix: Vec<f64>,
}

impl Reduction {
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.inputs).map(|i| self.matrix[i * self.outputs + j]).collect()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.inputs {
            return Err(Error::DimensionMismatch { expected: self.inputs, got: x.len() });
        }
        let mut out = vec![0.0; self.outputs];
        for (i, (&xi, &ci)) in x.iter().zip(&self.center).enumerate() {
            let v = xi - ci;
            if v == 0.0 {
                continue;
            }
            let row = &self.matrix[i * self.outputs..(i + 1) * self.outputs];
            for (o, w) in out.iter_mut().zip(row) {
                *o += v * w;
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct PcaFit {
    pub reduction: Reduction,
    /// Eigenvalues of the kept components, descending.
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Fewer than `d` strictly positive eigenvalues; trailing components span the null space.
    pub rank_deficient: bool,
}

/// Principal components of the rows of `x`, keeping the top `d`.
///
/// Columns are unit eigenvectors of the sample covariance in descending
/// eigenvalue order, each signed so its largest-magnitude entry is positive.
pub fn fit_pca(x: &[Vec<f64>], d: usize) -> Result<PcaFit> {
    let n = x.len();
    if n == 0 {
        return Err(Error::TooFewSamples { needed: 1, have: 0 });
    }
    let k = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != k) {
        return Err(Error::DimensionMismatch { expected: k, got: bad.len() });
    }
    if d == 0 || d > k {
        return Err(Error::Config(format!("PCA dimension {d} must be in 1..={k}")));
    }

    let mut center = vec![0.0; k];
    for row in x {
        for (c, v) in center.iter_mut().zip(row) {
            *c += v;
        }
    }
    for c in &mut center {
        *c /= n as f64;
    }
    let centered = DMatrix::from_fn(n, k, |i, j| x[i][j] - center[j]);
    let denom = (n.max(2) - 1) as f64;
    let cov = (centered.transpose() * &centered) / denom;
    let cov = (&cov + cov.transpose()) * 0.5;

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let positive_tol = 1e-12 * lambda_max.max(1.0);
    let positive = eig.eigenvalues.iter().filter(|&&v| v > positive_tol).count();

    let mut matrix = vec![0.0; k * d];
    let mut eigenvalues = Vec::with_capacity(d);
    for (col, &src) in order.iter().take(d).enumerate() {
        let v = eig.eigenvectors.column(src);
        let mut pivot = 0;
        for i in 1..k {
            if v[i].abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..k {
            matrix[i * d + col] = sign * v[i];
        }
        eigenvalues.push(eig.eigenvalues[src].max(0.0));
    }
    let explained_variance_ratio =
        eigenvalues.iter().map(|v| if total > 0.0 { v / total } else { 0.0 }).collect();

    Ok(PcaFit {
        reduction: Reduction { inputs: k, outputs: d, center, matrix },
        eigenvalues,
        explained_variance_ratio,
        rank_deficient: positive < d,
    })
}

/// Dense random projection with independent `±1/sqrt(d)` entries and zero center.
pub fn fit_random_projection(inputs: usize, d: usize, seed: u64) -> Result<Reduction> {
    if d == 0 || d > inputs {
        return Err(Error::Config(format!("projection dimension {d} must be in 1..={inputs}")));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let mut rng = derived_rng(seed, "random-projection", 0);
    let matrix = (0..inputs * d).map(|_| if rng.gen::<bool>() { scale } else { -scale }).collect();
    Ok(Reduction { inputs, outputs: d, center: vec![0.0; inputs], matrix })
}
