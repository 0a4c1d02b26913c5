use rand::Rng;

/// Result of a PAM run over a dissimilarity matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct KmedoidsResult {
    /// Medoid point indices, one per cluster.
    pub medoids: Vec<usize>,
    /// Objective after initialization and after every applied swap.
    pub objective_history: Vec<f64>,
    pub sweeps: usize,
}

impl KmedoidsResult {
    pub fn objective(&self) -> f64 {
        *self.objective_history.last().expect("history starts with the initial objective")
    }
}

/// Sum over points of the distance to the nearest medoid.
pub fn kmedoids_objective(dist: &[Vec<f64>], medoids: &[usize]) -> f64 {
    (0..dist.len()).map(|j| medoids.iter().map(|&m| dist[m][j]).fold(f64::INFINITY, f64::min)).sum()
}

const MAX_SWEEPS: usize = 100;
const MIN_IMPROVEMENT: f64 = 1e-12;

/// Farthest-point seeding: a seeded random first medoid, then repeatedly the
/// point farthest from every chosen medoid (lowest index on ties).
pub(crate) fn farthest_point_init<R: Rng>(dist: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<usize> {
    let n = dist.len();
    let mut medoids = vec![rng.gen_range(0..n)];
    let mut nearest: Vec<f64> = dist[medoids[0]].clone();
    while medoids.len() < k {
        let mut best = usize::MAX;
        for j in 0..n {
            if medoids.contains(&j) {
                continue;
            }
            if best == usize::MAX || nearest[j] > nearest[best] {
                best = j;
            }
        }
        medoids.push(best);
        for j in 0..n {
            nearest[j] = nearest[j].min(dist[best][j]);
        }
    }
    medoids
}

pub(crate) fn random_init<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    rand::seq::index::sample(rng, n, k).into_vec()
}

struct Assignment {
    nearest: Vec<usize>,
    d_nearest: Vec<f64>,
    d_second: Vec<f64>,
}

fn assign(dist: &[Vec<f64>], medoids: &[usize]) -> Assignment {
    let n = dist.len();
    let mut a = Assignment { nearest: vec![0; n], d_nearest: vec![f64::INFINITY; n], d_second: vec![f64::INFINITY; n] };
    for j in 0..n {
        for (slot, &m) in medoids.iter().enumerate() {
            let d = dist[m][j];
            if d < a.d_nearest[j] {
                a.d_second[j] = a.d_nearest[j];
                a.d_nearest[j] = d;
                a.nearest[j] = slot;
            } else if d < a.d_second[j] {
                a.d_second[j] = d;
            }
        }
    }
    a
}

/// PAM: from `initial` medoids, apply the best objective-reducing
/// (medoid, non-medoid) swap per sweep until none improves or 100 sweeps ran.
///
/// Swap gains for all medoids of one candidate are accumulated in a single
/// pass using nearest and second-nearest distances.
pub fn kmedoids(dist: &[Vec<f64>], initial: Vec<usize>) -> KmedoidsResult {
    let n = dist.len();
    let k = initial.len();
    let mut medoids = initial;
    let mut history = vec![kmedoids_objective(dist, &medoids)];
    if k == 0 || k >= n {
        return KmedoidsResult { medoids, objective_history: history, sweeps: 0 };
    }
    let mut is_medoid = vec![false; n];
    for &m in &medoids {
        is_medoid[m] = true;
    }
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let a = assign(dist, &medoids);
        let mut best = (0.0, usize::MAX, usize::MAX);
        let mut delta = vec![0.0; k];
        for o in 0..n {
            if is_medoid[o] {
                continue;
            }
            delta.iter_mut().for_each(|d| *d = 0.0);
            let mut shared = 0.0;
            for j in 0..n {
                let d_oj = dist[o][j];
                let dn = a.d_nearest[j];
                if d_oj < dn {
                    shared += d_oj - dn;
                } else {
                    delta[a.nearest[j]] += d_oj.min(a.d_second[j]) - dn;
                }
            }
            for (slot, d) in delta.iter().enumerate() {
                let total = d + shared;
                if total < best.0 {
                    best = (total, slot, o);
                }
            }
        }
        if best.0 >= -MIN_IMPROVEMENT {
            break;
        }
        let (_, slot, o) = best;
        is_medoid[medoids[slot]] = false;
        is_medoid[o] = true;
        medoids[slot] = o;
        history.push(kmedoids_objective(dist, &medoids));
    }
    KmedoidsResult { medoids, objective_history: history, sweeps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::derived_rng;

    fn euclid(points: &[(f64, f64)]) -> Vec<Vec<f64>> {
        points.iter().map(|a| points.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect()).collect()
    }

    #[test]
    fn one_medoid_per_separated_pair() {
        let pts = [(0.0, 0.0), (0.1, 0.0), (10.0, 0.0), (10.0, 0.2), (0.0, 10.0), (0.1, 10.1)];
        let d = euclid(&pts);
        let mut rng = derived_rng(1, "t", 0);
        let r = kmedoids(&d, farthest_point_init(&d, 3, &mut rng));
        let mut clusters: Vec<usize> = r.medoids.iter().map(|m| m / 2).collect();
        clusters.sort();
        assert_eq!(clusters, vec![0, 1, 2]);
    }

    #[test]
    fn objective_never_increases() {
        let pts: Vec<(f64, f64)> = (0..40).map(|i| ((i as f64 * 1.7).sin() * 5.0, (i as f64 * 0.3).cos() * 5.0)).collect();
        let d = euclid(&pts);
        let mut rng = derived_rng(2, "t", 0);
        let r = kmedoids(&d, random_init(40, 6, &mut rng));
        assert!(r.objective_history.windows(2).all(|w| w[1] <= w[0]));
        let mut sorted = r.medoids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 6);
    }

    #[test]
    fn degenerate_sizes() {
        let d = euclid(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(kmedoids(&d, vec![0, 1]).objective(), 0.0);
        assert_eq!(kmedoids(&d, vec![]).medoids, Vec::<usize>::new());
    }
}
