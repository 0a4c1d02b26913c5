use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::util::derived_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let w = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                (w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.bias[o]).tanh()
            })
            .collect()
    }
}

/// Fully connected tanh network with one tanh output unit, trained by
/// mini-batch gradient descent on squared error against `{-1, +1}` targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

const BATCH: usize = 32;

impl Mlp {
    pub fn fit(x: &[Vec<f64>], y: &[f64], hidden: &[usize], learning_rate: f64, epochs: usize, seed: u64) -> Self {
        let mut rng = derived_rng(seed, "mlp-init", 0);
        let mut sizes = vec![x[0].len()];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (inputs, outputs) = (w[0], w[1]);
                let limit = (6.0 / (inputs + outputs) as f64).sqrt();
                Layer {
                    inputs,
                    outputs,
                    weights: (0..inputs * outputs).map(|_| rng.gen_range(-limit..limit)).collect(),
                    bias: vec![0.0; outputs],
                }
            })
            .collect();
        let mut mlp = Mlp { layers };

        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut shuffle_rng = derived_rng(seed, "mlp-shuffle", 0);
        for _ in 0..epochs {
            order.shuffle(&mut shuffle_rng);
            for chunk in order.chunks(BATCH) {
                mlp.step(x, y, chunk, learning_rate);
            }
        }
        mlp
    }

    fn step(&mut self, x: &[Vec<f64>], y: &[f64], batch: &[usize], lr: f64) {
        let mut gw: Vec<Vec<f64>> = self.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect();
        let mut gb: Vec<Vec<f64>> = self.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect();
        for &i in batch {
            let mut acts = vec![x[i].clone()];
            for layer in &self.layers {
                let next = layer.forward(acts.last().expect("input activation"));
                acts.push(next);
            }
            let out = acts.last().expect("output activation")[0];
            // d(0.5 (out - y)^2)/d(pre-activation)
            let mut delta = vec![(out - y[i]) * (1.0 - out * out)];
            for (l, layer) in self.layers.iter().enumerate().rev() {
                let input = &acts[l];
                for o in 0..layer.outputs {
                    gb[l][o] += delta[o];
                    let row = &mut gw[l][o * layer.inputs..(o + 1) * layer.inputs];
                    for (g, v) in row.iter_mut().zip(input) {
                        *g += delta[o] * v;
                    }
                }
                if l > 0 {
                    delta = (0..layer.inputs)
                        .map(|k| {
                            let back: f64 = (0..layer.outputs).map(|o| layer.weights[o * layer.inputs + k] * delta[o]).sum();
                            back * (1.0 - input[k] * input[k])
                        })
                        .collect();
                }
            }
        }
        let scale = lr / batch.len() as f64;
        for (l, layer) in self.layers.iter_mut().enumerate() {
            for (w, g) in layer.weights.iter_mut().zip(&gw[l]) {
                *w -= scale * g;
            }
            for (b, g) in layer.bias.iter_mut().zip(&gb[l]) {
                *b -= scale * g;
            }
        }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        for layer in &self.layers {
            a = layer.forward(&a);
        }
        a[0]
    }
}
