use super::alphabet::{Alphabet, ALPHABET_SIZE};
use crate::error::{Error, Result};

/// Number of distinct bigrams over the alphabet.
pub const RAW_DIM: usize = ALPHABET_SIZE * ALPHABET_SIZE;

/// Frequency bigram vector: each overlapping 2-gram count divided by the
/// largest 2-gram count of the same text. Index of bigram `ab` is
/// `idx(a) * 63 + idx(b)`.
pub fn bigram_vector(text: &str, alphabet: &Alphabet) -> Result<Vec<f64>> {
    let mut dense = vec![0.0; RAW_DIM];
    for (i, v) in bigram_sparse(text, alphabet)? {
        dense[i] = v;
    }
    Ok(dense)
}

/// Nonzero entries of [`bigram_vector`] in increasing index order.
pub(crate) fn bigram_sparse(text: &str, alphabet: &Alphabet) -> Result<Vec<(usize, f64)>> {
    let indices = text
        .chars()
        .map(|c| alphabet.index_of(c).ok_or(Error::UnknownCharacter(c)))
        .collect::<Result<Vec<_>>>()?;
    let mut grams: Vec<usize> = indices.windows(2).map(|w| w[0] * ALPHABET_SIZE + w[1]).collect();
    grams.sort_unstable();
    let mut counts: Vec<(usize, u32)> = Vec::new();
    for g in grams {
        match counts.last_mut() {
            Some((last, c)) if *last == g => *c += 1,
            _ => counts.push((g, 1)),
        }
    }
    let max = f64::from(counts.iter().map(|(_, c)| *c).max().unwrap_or(1));
    Ok(counts.into_iter().map(|(g, c)| (g, f64::from(c) / max)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn dim(a: &Alphabet, pair: &str) -> usize {
        let cs: Vec<char> = pair.chars().collect();
        a.index_of(cs[0]).unwrap() * ALPHABET_SIZE + a.index_of(cs[1]).unwrap()
    }

    #[test]
    fn repeated_bigram() {
        let a = Alphabet::new();
        let v = bigram_vector("aaa", &a).unwrap();
        assert_eq!(v[dim(&a, "aa")], 1.0);
        assert_eq!(v.iter().filter(|x| **x != 0.0).count(), 1);
    }

    #[test]
    fn alternating_bigrams() {
        let a = Alphabet::new();
        let v = bigram_vector("abab", &a).unwrap();
        assert_eq!(v[dim(&a, "ab")], 1.0);
        assert_eq!(v[dim(&a, "ba")], 0.5);
        assert_eq!(v.iter().filter(|x| **x != 0.0).count(), 2);
    }

    #[test]
    fn unknown_character_is_an_error() {
        let a = Alphabet::new();
        assert!(matches!(bigram_vector("ab<c", &a), Err(Error::UnknownCharacter('<'))));
        assert!(matches!(bigram_vector("Abc", &a), Err(Error::UnknownCharacter('A'))));
    }

    proptest! {
        #[test]
        fn matches_brute_force_window_count(idx in proptest::collection::vec(0usize..63, 2..60)) {
            let a = Alphabet::new();
            let text: String = idx.iter().map(|&i| a.symbols()[i]).collect();
            let v = bigram_vector(&text, &a).unwrap();

            // independent count over string slices
            let chars: Vec<char> = text.chars().collect();
            let mut counts: HashMap<String, usize> = HashMap::new();
            for i in 0..chars.len() - 1 {
                *counts.entry(chars[i..i + 2].iter().collect()).or_default() += 1;
            }
            let max = *counts.values().max().unwrap() as f64;
            let nonzero = v.iter().filter(|x| **x != 0.0).count();
            prop_assert!(nonzero <= chars.len() - 1);
            prop_assert_eq!(nonzero, counts.len());
            prop_assert_eq!(v.iter().cloned().fold(0.0, f64::max), 1.0);
            for (pair, c) in &counts {
                prop_assert_eq!(v[dim(&a, pair)], *c as f64 / max);
            }
            prop_assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }
}
