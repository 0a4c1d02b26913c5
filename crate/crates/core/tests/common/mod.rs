#![allow(dead_code)]

use amods::svm::{kernel_distance, KernelSpec, SvmModel, TrainingSet};
use rand::Rng;

/// Cyclic Jacobi rotations on a symmetric matrix. Returns eigenvalues
/// (descending) and matching unit eigenvectors as columns.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|r| v[r][i]).collect()).collect();
    (values, vectors)
}

/// Sample covariance (divisor n - 1, or 1 for a single row).
pub fn covariance(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = x.len();
    let d = x[0].len();
    let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let denom = (n.max(2) - 1) as f64;
    (0..d)
        .map(|a| (0..d).map(|b| x.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / denom).collect())
        .collect()
}

/// Greedy farthest-first recomputed from scratch at every step.
pub fn brute_kff(kernel: &KernelSpec, cands: &[(Vec<f64>, f64)], malicious: &[Vec<f64>], count: usize) -> Vec<usize> {
    let mut picks: Vec<usize> = Vec::new();
    while picks.len() < count {
        let mut best: Option<(usize, f64)> = None;
        for (i, (x, f)) in cands.iter().enumerate() {
            if *f <= 0.0 || picks.contains(&i) {
                continue;
            }
            let mut s = 0.0;
            for y in malicious {
                s += kernel_distance(kernel, x, y).unwrap();
            }
            for &p in &picks {
                s += kernel_distance(kernel, x, &cands[p].0).unwrap();
            }
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        match best {
            Some((i, _)) => picks.push(i),
            None => break,
        }
    }
    picks
}

pub fn objective(dist: &[Vec<f64>], medoids: &[usize]) -> f64 {
    (0..dist.len()).map(|j| medoids.iter().map(|&m| dist[m][j]).fold(f64::INFINITY, f64::min)).sum()
}

/// Best objective over every k-subset of points.
pub fn exhaustive_kmedoids(dist: &[Vec<f64>], k: usize) -> f64 {
    fn rec(dist: &[Vec<f64>], k: usize, start: usize, cur: &mut Vec<usize>, best: &mut f64) {
        if cur.len() == k {
            *best = best.min(objective(dist, cur));
            return;
        }
        for i in start..dist.len() {
            cur.push(i);
            rec(dist, k, i + 1, cur, best);
            cur.pop();
        }
    }
    let mut best = f64::INFINITY;
    rec(dist, k, 0, &mut Vec::new(), &mut best);
    best
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

/// Full alpha vector recovered from a model's support vectors.
pub fn alphas(model: &SvmModel, set: &TrainingSet) -> Vec<f64> {
    let mut a = vec![0.0; set.len()];
    for (&i, &c) in model.support_indices.iter().zip(&model.coeffs) {
        a[i] = c * set.y()[i];
    }
    a
}

/// Largest violation of `sum a_i y_i = 0` and `0 <= a_i <= C`.
pub fn dual_violation(model: &SvmModel, set: &TrainingSet) -> (f64, f64) {
    let a = alphas(model, set);
    let eq = a.iter().zip(set.y()).map(|(a, y)| a * y).sum::<f64>().abs();
    let bound = a.iter().map(|&ai| (-ai).max(ai - model.c).max(0.0)).fold(0.0, f64::max);
    (eq, bound)
}

/// Dual objective `sum a - 1/2 sum_ij a_i a_j y_i y_j K_ij`.
pub fn dual_objective(model: &SvmModel) -> f64 {
    let mut quad = 0.0;
    for (ci, xi) in model.coeffs.iter().zip(&model.support_vectors) {
        for (cj, xj) in model.coeffs.iter().zip(&model.support_vectors) {
            quad += ci * cj * model.kernel.eval(xi, xj).unwrap();
        }
    }
    model.coeffs.iter().map(|c| c.abs()).sum::<f64>() - 0.5 * quad
}

/// True when no single (medoid, non-medoid) swap lowers the objective.
pub fn swap_local_optimum(dist: &[Vec<f64>], medoids: &[usize]) -> bool {
    let base = objective(dist, medoids);
    for slot in 0..medoids.len() {
        for o in 0..dist.len() {
            if medoids.contains(&o) {
                continue;
            }
            let mut m = medoids.to_vec();
            m[slot] = o;
            if objective(dist, &m) < base - 1e-12 {
                return false;
            }
        }
    }
    true
}

/// `k` tight blobs far apart from each other, `n` points in total.
pub fn blobs<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let c = i % k;
            vec![10.0 * c as f64 + rng.gen_range(-1.0..1.0), 5.0 * (c % 2) as f64 + rng.gen_range(-1.0..1.0)]
        })
        .collect()
}
