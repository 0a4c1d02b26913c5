/// Flags batches whose false-positive rate exceeds `factor` times the median
/// of earlier batches. With a zero median a batch is flagged only when its
/// rate is positive and at least three earlier batches exist. Batches with no
/// rate (no negatives) are never flagged and do not enter later medians.
pub fn drift_monitor(history: &[(u32, Option<f64>)], factor: f64) -> Vec<(u32, bool)> {
    let mut prior: Vec<f64> = Vec::new();
    let mut out = Vec::with_capacity(history.len());
    for &(batch, rate) in history {
        let flag = match rate {
            Some(rate) if !prior.is_empty() => {
                let med = median(&prior);
                if med > 0.0 {
                    rate > factor * med
                } else {
                    rate > 0.0 && prior.len() >= 3
                }
            }
            _ => false,
        };
        out.push((batch, flag));
        if let Some(rate) = rate {
            prior.push(rate);
        }
    }
    out
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    }
}
