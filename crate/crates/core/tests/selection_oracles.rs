mod common;

use amods::selection::{
    exemplar_selection, kmedoids, suspicion_selection, ConfusingRegion, KmedoidsInit, ScoredBatch,
};
use amods::svm::KernelSpec;
use common::{blobs, brute_kff, euclid, exhaustive_kmedoids, objective, random_points, swap_local_optimum};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn kff_matches_brute_force_greedy() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..12 {
        let n = [5, 40, 120, 200][trial % 4];
        let kernel = [KernelSpec::Rbf { gamma: 2.0 }, KernelSpec::Linear, KernelSpec::Polynomial { offset: 1.0, degree: 3 }]
            [trial % 3];
        let cands: Vec<(Vec<f64>, f64)> =
            random_points(&mut rng, n, 3).into_iter().map(|x| (x, rng.gen_range(-1.0..1.0))).collect();
        let malicious = random_points(&mut rng, trial % 6, 3);
        let count = rng.gen_range(0..=n);
        let refs: Vec<(&[f64], f64)> = cands.iter().map(|(x, f)| (x.as_slice(), *f)).collect();
        let mal_refs: Vec<&[f64]> = malicious.iter().map(Vec::as_slice).collect();
        assert_eq!(
            exemplar_selection(&kernel, &refs, &mal_refs, count),
            brute_kff(&kernel, &cands, &malicious, count),
            "trial {trial}"
        );
    }
}

fn dist_matrix(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points.iter().map(|a| points.iter().map(|b| euclid(a, b)).collect()).collect()
}

#[test]
fn kmedoids_objective_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..30 {
        let n = rng.gen_range(6..60);
        let k = rng.gen_range(1..6.min(n));
        let dist = dist_matrix(&random_points(&mut rng, n, 2));
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let r = kmedoids(&dist, idx[..k].to_vec());
        assert!(r.objective_history.windows(2).all(|w| w[1] <= w[0]));
        assert!((r.objective() - objective(&dist, &r.medoids)).abs() < 1e-9);
    }
}

fn pam_suspicions(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
    let n = points.len();
    let batch = ScoredBatch::new(points.to_vec(), vec![0.0; n]).unwrap();
    let region = ConfusingRegion { f_lower: -1.0, f_upper: 1.0 };
    let all: Vec<usize> = (0..n).collect();
    // cluster size 1 with cap k gives exactly k medoids
    let (medoids, confusing) =
        suspicion_selection(&KernelSpec::Linear, &batch, &all, &region, 1, k, KmedoidsInit::FarthestPoint, seed);
    assert_eq!(confusing, n);
    assert_eq!(medoids.len(), k);
    medoids
}

#[test]
fn suspicions_match_exhaustive_optimum_on_clustered_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..40 {
        let k = 1 + trial % 3;
        let n = rng.gen_range((2 * k).max(4)..=12);
        let points = blobs(&mut rng, n, k);
        let medoids = pam_suspicions(&points, k, trial as u64);
        let dist = dist_matrix(&points);
        let (got, best) = (objective(&dist, &medoids), exhaustive_kmedoids(&dist, k));
        assert!((got - best).abs() < 1e-9, "trial {trial} n={n} k={k}: {got} vs optimum {best}");
    }
}

#[test]
fn three_separated_pairs_get_one_medoid_each() {
    let points = vec![vec![0.0, 0.0], vec![0.2, 0.1], vec![8.0, 0.0], vec![8.1, 0.3], vec![0.0, 9.0], vec![0.3, 9.2]];
    for seed in 0..6 {
        let mut pairs: Vec<usize> = pam_suspicions(&points, 3, seed).iter().map(|m| m / 2).collect();
        pairs.sort();
        assert_eq!(pairs, vec![0, 1, 2]);
        let dist = dist_matrix(&points);
        assert!((objective(&dist, &pam_suspicions(&points, 3, seed)) - exhaustive_kmedoids(&dist, 3)).abs() < 1e-12);
    }
}

#[test]
fn suspicions_are_swap_local_optima_on_unstructured_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..40 {
        let k = 1 + trial % 3;
        let n = rng.gen_range((2 * k).max(4)..=12);
        let points = random_points(&mut rng, n, 2);
        let medoids = pam_suspicions(&points, k, trial as u64);
        let dist = dist_matrix(&points);
        assert!(swap_local_optimum(&dist, &medoids), "trial {trial}");
        assert!(objective(&dist, &medoids) >= exhaustive_kmedoids(&dist, k) - 1e-9);
    }
}
