use serde::{Deserialize, Serialize};

use crate::util::dot;

/// L2-regularized logistic regression fitted by accelerated gradient descent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Logistic {
    pub fn fit(x: &[Vec<f64>], y: &[f64], l2: f64, max_iter: usize) -> Self {
        let n = x.len() as f64;
        let dim = x[0].len();
        // Lipschitz bound of the mean log-loss gradient, bias included as a unit feature
        let max_sq = x.iter().map(|r| dot(r, r) + 1.0).fold(0.0, f64::max);
        let step = 1.0 / (0.25 * max_sq + l2);

        let mut w = vec![0.0; dim + 1];
        let mut prev = w.clone();
        let mut grad = vec![0.0; dim + 1];
        for iter in 0..max_iter {
            let momentum = iter as f64 / (iter as f64 + 3.0);
            let look: Vec<f64> = w.iter().zip(&prev).map(|(a, b)| a + momentum * (a - b)).collect();
            grad.iter_mut().for_each(|g| *g = 0.0);
            for (row, &t) in x.iter().zip(y) {
                let target = if t > 0.0 { 1.0 } else { 0.0 };
                let z = dot(&look[..dim], row) + look[dim];
                let err = (sigmoid(z) - target) / n;
                for (g, v) in grad.iter_mut().zip(row) {
                    *g += err * v;
                }
                grad[dim] += err;
            }
            for (g, v) in grad.iter_mut().zip(&look).take(dim) {
                *g += l2 * v;
            }
            prev = std::mem::replace(&mut w, look.iter().zip(&grad).map(|(v, g)| v - step * g).collect());
        }
        Logistic { bias: w[dim], weights: w[..dim].to_vec() }
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, x) + self.bias)
    }

    /// `2 * sigmoid(w'x + b) - 1`.
    pub fn score(&self, x: &[f64]) -> f64 {
        (2.0 * self.probability(x) - 1.0).clamp(-1.0, 1.0)
    }
}
