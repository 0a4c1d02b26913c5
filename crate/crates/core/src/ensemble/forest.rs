use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::util::derived_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf { vote: i8 },
    Split { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub root: Node,
}

impl Tree {
    pub fn vote(&self, x: &[f64]) -> i8 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { vote } => return *vote,
                Node::Split { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }
}

/// Bagged Gini trees with `ceil(sqrt(d))` candidate features per split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<Tree>,
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[f64], trees: usize, max_depth: usize, seed: u64) -> Self {
        let trees = (0..trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = derived_rng(seed, "forest-tree", t as u64);
                let n = x.len();
                let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                let mut builder = TreeBuilder { x, y, max_depth, mtry: (x[0].len() as f64).sqrt().ceil() as usize };
                Tree { root: builder.build(sample, 0, &mut rng) }
            })
            .collect();
        RandomForest { trees }
    }

    /// `2 * (fraction of trees voting malicious) - 1`.
    pub fn score(&self, x: &[f64]) -> f64 {
        let pos = self.trees.iter().filter(|t| t.vote(x) > 0).count();
        2.0 * pos as f64 / self.trees.len() as f64 - 1.0
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    max_depth: usize,
    mtry: usize,
}

fn gini(pos: f64, total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    let p = pos / total;
    2.0 * p * (1.0 - p)
}

impl TreeBuilder<'_> {
    fn leaf(&self, idx: &[usize]) -> Node {
        let pos = idx.iter().filter(|&&i| self.y[i] > 0.0).count();
        Node::Leaf { vote: if 2 * pos > idx.len() { 1 } else { -1 } }
    }

    fn build<R: Rng>(&mut self, idx: Vec<usize>, depth: usize, rng: &mut R) -> Node {
        let pos = idx.iter().filter(|&&i| self.y[i] > 0.0).count();
        if pos == 0 || pos == idx.len() || depth >= self.max_depth || idx.len() < 2 {
            return self.leaf(&idx);
        }
        let dim = self.x[0].len();
        let mut features: Vec<usize> = (0..dim).collect();
        features.shuffle(rng);
        features.truncate(self.mtry.clamp(1, dim));

        let total = idx.len() as f64;
        let parent = gini(pos as f64, total);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = idx.clone();
        for &f in &features {
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let mut left_pos = 0.0;
            for k in 0..sorted.len() - 1 {
                if self.y[sorted[k]] > 0.0 {
                    left_pos += 1.0;
                }
                let (lo, hi) = (self.x[sorted[k]][f], self.x[sorted[k + 1]][f]);
                if lo == hi {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = total - nl;
                let impurity = (nl * gini(left_pos, nl) + nr * gini(pos as f64 - left_pos, nr)) / total;
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    best = Some((impurity, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        match best {
            Some((impurity, feature, threshold)) if impurity < parent => {
                let (left, right): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
                Node::Split {
                    feature,
                    threshold,
                    left: Box::new(self.build(left, depth + 1, rng)),
                    right: Box::new(self.build(right, depth + 1, rng)),
                }
            }
            _ => self.leaf(&idx),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_node_is_a_leaf_of_its_class() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = [1.0, 1.0, 1.0];
        let mut b = TreeBuilder { x: &x, y: &y, max_depth: 5, mtry: 1 };
        let mut rng = derived_rng(0, "t", 0);
        assert_eq!(b.build(vec![0, 1, 2], 0, &mut rng), Node::Leaf { vote: 1 });
        let y = [-1.0, -1.0, -1.0];
        let mut b = TreeBuilder { x: &x, y: &y, max_depth: 5, mtry: 1 };
        assert_eq!(b.build(vec![0, 1, 2], 0, &mut rng), Node::Leaf { vote: -1 });
    }

    #[test]
    fn separable_data_is_learned_and_seeded() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, ((i * 13) % 7) as f64]).collect();
        let y: Vec<f64> = (0..40).map(|i| if i >= 20 { 1.0 } else { -1.0 }).collect();
        let f = RandomForest::fit(&x, &y, 15, 6, 3);
        let correct = x.iter().zip(&y).filter(|(p, t)| f.score(p).signum() == **t).count();
        assert!(correct >= 38, "{correct}");
        assert_eq!(f, RandomForest::fit(&x, &y, 15, 6, 3));
    }

    #[test]
    fn depth_zero_gives_majority_stump() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = [1.0, -1.0, -1.0];
        let mut b = TreeBuilder { x: &x, y: &y, max_depth: 0, mtry: 1 };
        let mut rng = derived_rng(0, "t", 0);
        assert_eq!(b.build(vec![0, 1, 2], 0, &mut rng), Node::Leaf { vote: -1 });
    }
}
