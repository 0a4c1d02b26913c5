use crate::svm::KernelSpec;

/// Kernel farthest-first over candidates on the malicious side.
///
/// `candidates` are `(embedding, f)` pairs; only `f > 0` is eligible. Each
/// pick maximizes the summed kernel distance to the malicious set, which
/// starts as `malicious` and grows by each pick. Returns candidate indices in
/// pick order; ties go to the lower index.
pub fn exemplar_selection(
    kernel: &KernelSpec,
    candidates: &[(&[f64], f64)],
    malicious: &[&[f64]],
    count: usize,
) -> Vec<usize> {
    let eligible: Vec<usize> = (0..candidates.len()).filter(|&i| candidates[i].1 > 0.0).collect();
    let mut sums: Vec<f64> = eligible
        .iter()
        .map(|&i| malicious.iter().fold(0.0, |acc, y| acc + kernel.distance_unchecked(candidates[i].0, y)))
        .collect();
    let mut taken = vec![false; eligible.len()];
    let mut picks = Vec::with_capacity(count.min(eligible.len()));
    while picks.len() < count {
        let mut best: Option<usize> = None;
        for (slot, &s) in sums.iter().enumerate() {
            if !taken[slot] && best.is_none_or(|b| s > sums[b]) {
                best = Some(slot);
            }
        }
        let Some(slot) = best else { break };
        taken[slot] = true;
        let chosen = eligible[slot];
        picks.push(chosen);
        for (other, sum) in sums.iter_mut().enumerate() {
            if !taken[other] {
                *sum += kernel.distance_unchecked(candidates[eligible[other]].0, candidates[chosen].0);
            }
        }
    }
    picks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustion_and_zero_count() {
        let k = KernelSpec::Rbf { gamma: 1.0 };
        let a = [0.5, 0.5];
        let b = [0.1, 0.2];
        let cands: Vec<(&[f64], f64)> = vec![(&a, 0.4), (&b, -0.3)];
        assert_eq!(exemplar_selection(&k, &cands, &[], 3), vec![0]);
        assert!(exemplar_selection(&k, &cands, &[], 0).is_empty());
    }

    #[test]
    fn picks_farthest_from_known_malicious() {
        let k = KernelSpec::Linear;
        let near = [1.0];
        let far = [9.0];
        let mid = [4.0];
        let known = [0.0];
        let cands: Vec<(&[f64], f64)> = vec![(&near, 1.0), (&far, 1.0), (&mid, 1.0)];
        // after picking 9 both remaining sums are 9; the lower index wins
        assert_eq!(exemplar_selection(&k, &cands, &[&known], 3), vec![1, 0, 2]);
    }
}
