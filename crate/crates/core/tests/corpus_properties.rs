use std::collections::BTreeMap;

use amods::corpus::{default_class_mix, gen_malicious};
use amods::features::Alphabet;
use amods::ingest::{char_filter, normalize, AttackClass, FilterVerdict, Normalized, RawQuery};
use proptest::prelude::*;

#[test]
fn class_mix_within_three_sigma() {
    let n = 4000;
    let mix = default_class_mix();
    let qs = gen_malicious(n, &mix, 17).unwrap();
    assert_eq!(qs.len(), n);
    let mut counts: BTreeMap<AttackClass, usize> = BTreeMap::new();
    for q in &qs {
        *counts.entry(q.attack_class.expect("malicious queries carry a class")).or_default() += 1;
    }
    let total: f64 = mix.values().sum();
    for (class, w) in &mix {
        let p = w / total;
        let expected = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        let got = counts.get(class).copied().unwrap_or(0) as f64;
        assert!((got - expected).abs() <= 3.0 * sigma, "{class:?}: {got} vs {expected} +- {sigma}");
    }
}

fn raw(text: &str) -> RawQuery {
    RawQuery { text: text.to_owned(), source_line: 1, day: 1 }
}

proptest! {
    #[test]
    fn kept_queries_use_only_the_alphabet(text in "[ -~]{0,40}") {
        let alphabet = Alphabet::new();
        if let Ok(Normalized::Query(q)) = normalize(&raw(&text)) {
            if char_filter(&q.text) == FilterVerdict::Keep {
                prop_assert!(alphabet.contains_all(&q.text), "{:?}", q.text);
                // idempotent on kept output
                match normalize(&raw(&q.text)) {
                    Ok(Normalized::Query(again)) => prop_assert_eq!(again.text, q.text),
                    other => prop_assert!(false, "renormalizing {:?} gave {:?}", q.text, other),
                }
            }
        }
    }
}
