//! Seeded synthetic corpora: benign parameter strings from weighted
//! templates, attack payloads from per-class grammars, and the shared
//! line-delimited corpus format.
//!
//! Templates live in a JSON file (the built-in one is `data/templates.json`).
//! Patterns reference slots as `{name}`. A slot is a list of alternatives,
//! themselves patterns, or one of the generators `@int`, `@small`, `@hex`,
//! `@date`, `@cols`, `@updir` and `@ip`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptive::OracleLabeler;
use crate::error::{Error, Result};
use crate::ingest::{char_filter, normalize, AttackClass, FilterVerdict, Label, Normalized, NormalizedQuery, RawQuery};
use crate::util::derived_rng;

const BUILTIN_TEMPLATES: &str = include_str!("../data/templates.json");
const MAX_EXPANSION_DEPTH: usize = 12;
const MAX_ATTEMPTS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Slot {
    Generator(String),
    Choices(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenignParam {
    pub name: String,
    pub value: String,
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenignTemplates {
    /// `[pair count, weight]` entries.
    pub pairs: Vec<(usize, f64)>,
    pub params: Vec<BenignParam>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackTemplate {
    pub pattern: String,
    /// First day the template appears on; the initial set is day 0.
    #[serde(default)]
    pub from_day: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaliciousTemplates {
    /// Parameter names that carry the payload.
    pub carriers: Vec<String>,
    /// `[benign pair count, weight]` entries for the surrounding shell.
    pub extra_pairs: Vec<(usize, f64)>,
    pub classes: BTreeMap<AttackClass, Vec<AttackTemplate>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mutation {
    /// Chance a malicious query gets random upper-casing.
    pub case_prob: f64,
    /// Per-letter upper-casing chance once case variation applies.
    pub case_letter_prob: f64,
    /// Chance a payload gets some characters percent-encoded.
    pub encode_prob: f64,
    /// Chance an encoded character is encoded twice.
    pub double_encode_prob: f64,
    /// Chance a benign parameter name gets random upper-casing.
    pub benign_case_prob: f64,
}

impl Default for Mutation {
    fn default() -> Self {
        Mutation { case_prob: 0.4, case_letter_prob: 0.3, encode_prob: 0.3, double_encode_prob: 0.2, benign_case_prob: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateSet {
    pub slots: HashMap<String, Slot>,
    pub benign: BenignTemplates,
    pub malicious: MaliciousTemplates,
    #[serde(default)]
    pub mutation: Mutation,
    /// Inclusive range of `@updir` repetitions.
    #[serde(default = "default_updir")]
    pub updir_depth: (usize, usize),
}

fn default_updir() -> (usize, usize) {
    (1, 8)
}

impl TemplateSet {
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_TEMPLATES).expect("built-in templates are valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: TemplateSet = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("templates: {msg}")));
        for (name, slot) in &self.slots {
            match slot {
                Slot::Generator(g) if !GENERATORS.contains(&g.as_str()) => return bad(format!("slot {name}: unknown generator {g}")),
                Slot::Choices(c) if c.is_empty() => return bad(format!("slot {name} has no alternatives")),
                _ => {}
            }
        }
        let mut patterns: Vec<&str> = self.slots.values().flat_map(|s| match s {
            Slot::Choices(c) => c.iter().map(String::as_str).collect(),
            Slot::Generator(_) => Vec::new(),
        }).collect();
        patterns.extend(self.benign.params.iter().map(|p| p.value.as_str()));
        patterns.extend(self.malicious.classes.values().flatten().map(|t| t.pattern.as_str()));
        for p in &patterns {
            for name in placeholders(p)? {
                if !self.slots.contains_key(name) {
                    return bad(format!("unknown slot {{{name}}} in {p:?}"));
                }
            }
        }
        // a cycle shows up as runaway depth from some slot
        for name in self.slots.keys() {
            self.depth_of(name, 0)?;
        }
        if self.benign.params.is_empty() || self.benign.pairs.is_empty() {
            return bad("benign templates are empty".into());
        }
        if self.malicious.carriers.is_empty() || self.malicious.extra_pairs.is_empty() {
            return bad("malicious carriers or shell sizes are empty".into());
        }
        for class in AttackClass::ALL {
            if !self.malicious.classes.get(&class).is_some_and(|t| t.iter().any(|t| t.from_day == 0)) {
                return bad(format!("class {class:?} needs a template available from day 0"));
            }
        }
        let (lo, hi) = self.updir_depth;
        if lo == 0 || lo > hi {
            return bad(format!("invalid updir depth range {lo}..={hi}"));
        }
        Ok(())
    }

    fn depth_of(&self, slot: &str, depth: usize) -> Result<()> {
        if depth > MAX_EXPANSION_DEPTH {
            return Err(Error::Config(format!("templates: slot {slot} expands too deeply (cycle?)")));
        }
        if let Some(Slot::Choices(c)) = self.slots.get(slot) {
            for p in c {
                for name in placeholders(p)? {
                    self.depth_of(name, depth + 1)?;
                }
            }
        }
        Ok(())
    }

    /// Expands every `{slot}` in `pattern`.
    pub fn expand(&self, pattern: &str, rng: &mut ChaCha8Rng) -> String {
        let mut out = String::new();
        let mut rest = pattern;
        while let Some(open) = rest.find('{') {
            let Some(close) = rest[open..].find('}').map(|c| open + c) else { break };
            out.push_str(&rest[..open]);
            out.push_str(&self.fill(&rest[open + 1..close], rng));
            rest = &rest[close + 1..];
        }
        out.push_str(rest);
        out
    }

    fn fill(&self, slot: &str, rng: &mut ChaCha8Rng) -> String {
        match &self.slots[slot] {
            Slot::Choices(c) => {
                let pick = &c[rng.gen_range(0..c.len())];
                self.expand(pick, rng)
            }
            Slot::Generator(g) => match g.as_str() {
                "@int" => {
                    let digits = rng.gen_range(1..=5u32);
                    rng.gen_range(10u32.pow(digits - 1)..10u32.pow(digits)).to_string()
                }
                "@small" => rng.gen_range(1..=50).to_string(),
                "@hex" => {
                    let n = rng.gen_range(8..=32);
                    (0..n).map(|_| char::from_digit(rng.gen_range(0..16), 16).unwrap()).collect()
                }
                "@date" => format!("{}-{:02}-{:02}", rng.gen_range(2009..=2015), rng.gen_range(1..=12), rng.gen_range(1..=28)),
                "@cols" => {
                    let k = rng.gen_range(1..=8);
                    let null = rng.gen_bool(0.25);
                    (1..=k).map(|i| if null { "null".to_owned() } else { i.to_string() }).collect::<Vec<_>>().join(",")
                }
                "@updir" => {
                    let depth = rng.gen_range(self.updir_depth.0..=self.updir_depth.1);
                    let up = match self.slots.get("dt_up") {
                        Some(Slot::Choices(c)) => c[rng.gen_range(0..c.len())].clone(),
                        _ => "../".to_owned(),
                    };
                    up.repeat(depth)
                }
                "@ip" => format!(
                    "{}.{}.{}.{}",
                    rng.gen_range(1..=223),
                    rng.gen_range(0..=255),
                    rng.gen_range(0..=255),
                    rng.gen_range(1..=254)
                ),
                other => unreachable!("generator {other} rejected at load"),
            },
        }
    }

    /// Raw benign query before normalization.
    fn benign_raw(&self, rng: &mut ChaCha8Rng, count: usize) -> String {
        let params = &self.benign.params;
        let mut weights: Vec<f64> = params.iter().map(|p| p.weight).collect();
        let mut pairs = Vec::with_capacity(count);
        for _ in 0..count.min(params.len()) {
            let Ok(dist) = WeightedIndex::new(&weights) else { break };
            let i = dist.sample(rng);
            weights[i] = 0.0;
            let mut name = params[i].name.clone();
            if rng.gen_bool(self.mutation.benign_case_prob) {
                name = vary_case(&name, 0.5, rng);
            }
            pairs.push(format!("{}={}", name, self.expand(&params[i].value, rng)));
        }
        pairs.join("&")
    }

    fn malicious_raw(&self, class: AttackClass, day: u32, rng: &mut ChaCha8Rng) -> String {
        let templates: Vec<&AttackTemplate> =
            self.malicious.classes[&class].iter().filter(|t| t.from_day <= day).collect();
        let template = templates[rng.gen_range(0..templates.len())];
        let mut payload = self.expand(&template.pattern, rng);
        let m = &self.mutation;
        if rng.gen_bool(m.encode_prob) {
            payload = percent_mutate(&payload, m.double_encode_prob, rng);
        }
        let carrier = &self.malicious.carriers[rng.gen_range(0..self.malicious.carriers.len())];
        let attack = format!("{carrier}={payload}");

        let extra = weighted_count(&self.malicious.extra_pairs, rng);
        let mut pairs: Vec<String> = if extra > 0 {
            self.benign_raw(rng, extra).split('&').filter(|p| !p.starts_with(&format!("{carrier}="))).map(str::to_owned).collect()
        } else {
            Vec::new()
        };
        let at = rng.gen_range(0..=pairs.len());
        pairs.insert(at, attack);
        let raw = pairs.join("&");
        if rng.gen_bool(m.case_prob) {
            vary_case(&raw, m.case_letter_prob, rng)
        } else {
            raw
        }
    }
}

const GENERATORS: [&str; 7] = ["@int", "@small", "@hex", "@date", "@cols", "@updir", "@ip"];

fn placeholders(pattern: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        let close = rest[open..]
            .find('}')
            .map(|c| open + c)
            .ok_or_else(|| Error::Config(format!("templates: unclosed brace in {pattern:?}")))?;
        out.push(&rest[open + 1..close]);
        rest = &rest[close + 1..];
    }
    Ok(out)
}

fn weighted_count(entries: &[(usize, f64)], rng: &mut ChaCha8Rng) -> usize {
    let dist = WeightedIndex::new(entries.iter().map(|e| e.1)).expect("validated weights");
    entries[dist.sample(rng)].0
}

fn vary_case(text: &str, p: f64, rng: &mut ChaCha8Rng) -> String {
    text.chars().map(|c| if c.is_ascii_lowercase() && rng.gen_bool(p) { c.to_ascii_uppercase() } else { c }).collect()
}

/// Percent-encodes some punctuation of a payload, occasionally twice.
fn percent_mutate(payload: &str, double_p: f64, rng: &mut ChaCha8Rng) -> String {
    let mut out = String::with_capacity(payload.len() * 2);
    for c in payload.chars() {
        if matches!(c, '/' | '.' | '\'' | '(' | ')' | '=' | ':' | ',' | ';') && rng.gen_bool(0.5) {
            let code = format!("{:02X}", c as u32);
            let code = if rng.gen_bool(0.5) { code.to_ascii_lowercase() } else { code };
            if rng.gen_bool(double_p) {
                out.push_str("%25");
            } else {
                out.push('%');
            }
            out.push_str(&code);
        } else {
            out.push(c);
        }
    }
    out
}

/// Normalizes a raw generated query; `None` unless it survives as a kept query.
fn finish(raw: &str, day: u32) -> Option<String> {
    match normalize(&RawQuery { text: raw.to_owned(), source_line: 0, day }) {
        Ok(Normalized::Query(q)) if char_filter(&q.text) == FilterVerdict::Keep => Some(q.text),
        _ => None,
    }
}

/// Class proportions keyed by attack class; renormalized to sum to 1 on use.
pub type ClassMix = BTreeMap<AttackClass, f64>;

pub fn default_class_mix() -> ClassMix {
    BTreeMap::from([
        (AttackClass::Xss, 0.4909),
        (AttackClass::Sqli, 0.2832),
        (AttackClass::Dt, 0.0982),
        (AttackClass::Rfi, 0.0892),
    ])
}

fn normalized_mix(mix: &ClassMix) -> Result<Vec<(AttackClass, f64)>> {
    let total: f64 = mix.values().sum();
    if mix.values().any(|w| !(*w >= 0.0) || !w.is_finite()) || !(total > 0.0) {
        return Err(Error::Config("class mix needs non-negative weights with a positive sum".into()));
    }
    Ok(mix.iter().map(|(c, w)| (*c, w / total)).collect())
}

/// `n` distinct benign queries not in `exclude`.
pub fn gen_benign_with(templates: &TemplateSet, n: usize, seed: u64, exclude: &HashSet<String>) -> Vec<NormalizedQuery> {
    let mut rng = derived_rng(seed, "benign", 0);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        let count = weighted_count(&templates.benign.pairs, &mut rng);
        let Some(text) = finish(&templates.benign_raw(&mut rng, count), 0) else { continue };
        // give up on uniqueness only if the template space is exhausted
        let unique = attempts < n * 100 + MAX_ATTEMPTS;
        if exclude.contains(&text) || (unique && seen.contains(&text)) {
            continue;
        }
        seen.insert(text.clone());
        out.push(NormalizedQuery::labeled(text, Label::Benign, None, 0));
    }
    out
}

pub fn gen_benign(n: usize, seed: u64) -> Vec<NormalizedQuery> {
    gen_benign_with(&TemplateSet::builtin(), n, seed, &HashSet::new())
}

/// `n` distinct malicious queries for `day`, none of them in `exclude`.
pub fn gen_malicious_with(
    templates: &TemplateSet,
    n: usize,
    mix: &ClassMix,
    day: u32,
    seed: u64,
    exclude: &HashSet<String>,
) -> Result<Vec<NormalizedQuery>> {
    let mix = normalized_mix(mix)?;
    let dist = WeightedIndex::new(mix.iter().map(|m| m.1)).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = derived_rng(seed, "malicious", day as u64);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let class = mix[dist.sample(&mut rng)].0;
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > MAX_ATTEMPTS {
                return Err(Error::Config(format!("templates cannot produce enough distinct {class:?} queries")));
            }
            let Some(text) = finish(&templates.malicious_raw(class, day, &mut rng), day) else { continue };
            if exclude.contains(&text) || !seen.insert(text.clone()) {
                continue;
            }
            out.push(NormalizedQuery::labeled(text, Label::Malicious, Some(class), day));
            break;
        }
    }
    Ok(out)
}

pub fn gen_malicious(n: usize, mix: &ClassMix, seed: u64) -> Result<Vec<NormalizedQuery>> {
    gen_malicious_with(&TemplateSet::builtin(), n, mix, 0, seed, &HashSet::new())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub batches: u32,
    pub batch_size: usize,
    pub malicious_per_batch: usize,
    pub initial_benign: usize,
    pub initial_malicious: usize,
    pub class_mix: ClassMix,
    pub seed: u64,
    /// Pool benign queries of all batches and shuffle before assigning them.
    pub shuffle_benign: bool,
    /// Template file replacing the built-in one.
    pub templates: Option<PathBuf>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            batches: 10,
            batch_size: 10_000,
            malicious_per_batch: 92,
            initial_benign: 80,
            initial_malicious: 20,
            class_mix: default_class_mix(),
            seed: 0,
            shuffle_benign: true,
            templates: None,
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.malicious_per_batch > self.batch_size {
            return Err(Error::Config(format!(
                "malicious_per_batch {} exceeds batch_size {}",
                self.malicious_per_batch, self.batch_size
            )));
        }
        normalized_mix(&self.class_mix).map(|_| ())
    }

    fn template_set(&self) -> Result<TemplateSet> {
        match &self.templates {
            Some(p) => TemplateSet::load(p),
            None => Ok(TemplateSet::builtin()),
        }
    }
}

/// An initial labeled set (day 0) plus unknown batches keyed by day.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub initial: Vec<NormalizedQuery>,
    pub batches: Vec<(u32, Vec<NormalizedQuery>)>,
}

pub fn gen_corpus(config: &CorpusConfig) -> Result<Corpus> {
    config.validate()?;
    let templates = config.template_set()?;
    let benign_per_batch = config.batch_size - config.malicious_per_batch;
    let n_batches = config.batches as usize;

    let total_benign = config.initial_benign + benign_per_batch * n_batches;
    let mut benign = gen_benign_with(&templates, total_benign, config.seed, &HashSet::new());
    let mut batch_benign = benign.split_off(config.initial_benign);
    let initial_benign = benign;
    if config.shuffle_benign {
        batch_benign.shuffle(&mut derived_rng(config.seed, "benign-shuffle", 0));
    }
    let benign_texts: HashSet<String> =
        initial_benign.iter().chain(&batch_benign).map(|q| q.text.clone()).collect();

    let mut initial =
        gen_malicious_with(&templates, config.initial_malicious, &config.class_mix, 0, config.seed, &benign_texts)?;
    initial.extend(initial_benign);
    initial.shuffle(&mut derived_rng(config.seed, "initial-order", 0));

    let chunks: Vec<Vec<NormalizedQuery>> = if benign_per_batch == 0 {
        vec![Vec::new(); n_batches]
    } else {
        batch_benign.chunks(benign_per_batch).map(<[NormalizedQuery]>::to_vec).collect()
    };
    let batches = chunks
        .into_par_iter()
        .enumerate()
        .map(|(i, chunk)| -> Result<(u32, Vec<NormalizedQuery>)> {
            let day = i as u32 + 1;
            let mut batch =
                gen_malicious_with(&templates, config.malicious_per_batch, &config.class_mix, day, config.seed, &benign_texts)?;
            batch.extend(chunk.into_iter().map(|q| NormalizedQuery { day, ..q }));
            batch.shuffle(&mut derived_rng(config.seed, "batch-order", day as u64));
            Ok((day, batch))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus { initial, batches })
}

impl Corpus {
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut initial = Vec::new();
        let mut by_day: BTreeMap<u32, Vec<NormalizedQuery>> = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let q: NormalizedQuery =
                serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, reason: e.to_string() })?;
            if q.day == 0 {
                initial.push(q);
            } else {
                by_day.entry(q.day).or_default().push(q);
            }
        }
        Ok(Corpus { initial, batches: by_day.into_iter().collect() })
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        for q in self.records() {
            serde_json::to_writer(&mut writer, q)?;
            writer.write_all(b"\n")?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(BufReader::new(fs::File::open(path)?))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write(std::io::BufWriter::new(fs::File::create(path)?))
    }

    pub fn records(&self) -> impl Iterator<Item = &NormalizedQuery> {
        self.initial.iter().chain(self.batches.iter().flat_map(|b| &b.1))
    }

    pub fn batch_ids(&self) -> Vec<u32> {
        self.batches.iter().map(|b| b.0).collect()
    }

    /// The requested batches in the requested order; all of them when `ids` is empty.
    pub fn select(&self, ids: &[u32]) -> Result<Vec<(u32, Vec<NormalizedQuery>)>> {
        if ids.is_empty() {
            return Ok(self.batches.clone());
        }
        ids.iter()
            .map(|id| {
                self.batches
                    .iter()
                    .find(|b| b.0 == *id)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("corpus has no batch {id}")))
            })
            .collect()
    }

    pub fn oracle(&self) -> OracleLabeler {
        OracleLabeler::from_queries(self.records())
    }

    /// Fails when one text carries two different labels.
    pub fn check_labels(&self) -> Result<()> {
        let mut seen: HashMap<&str, Label> = HashMap::new();
        for q in self.records() {
            if let Some(l) = q.label {
                if *seen.entry(&q.text).or_insert(l) != l {
                    return Err(Error::Config(format!("conflicting labels for {:?}", q.text)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{bigram_vector, Alphabet};

    fn small_config(seed: u64) -> CorpusConfig {
        CorpusConfig { batches: 3, batch_size: 200, malicious_per_batch: 10, seed, ..Default::default() }
    }

    #[test]
    fn builtin_templates_load() {
        let t = TemplateSet::builtin();
        assert_eq!(t.malicious.classes.len(), 4);
    }

    #[test]
    fn benign_example_shape() {
        let json = r#"{
            "slots": {"int": "@int"},
            "benign": {"pairs": [[1, 1]], "params": [{"name": "postid", "value": "123"}]},
            "malicious": {"carriers": ["postid"], "extra_pairs": [[0, 1]], "classes": {
                "SQLI": [{"pattern": "1"}], "XSS": [{"pattern": "1"}], "DT": [{"pattern": "1"}], "RFI": [{"pattern": "1"}]}},
            "mutation": {"case_prob": 0, "case_letter_prob": 0, "encode_prob": 0, "double_encode_prob": 0, "benign_case_prob": 0}
        }"#;
        let t = TemplateSet::from_json(json).unwrap();
        let q = gen_benign_with(&t, 1, 0, &HashSet::new());
        assert_eq!(q[0].text, "postid=123");
    }

    #[test]
    fn dt_depth_four_example() {
        let mut t = TemplateSet::builtin();
        t.slots.insert("dt_up".into(), Slot::Choices(vec!["../".into()]));
        t.slots.insert("dt_target".into(), Slot::Choices(vec!["etc/passwd".into()]));
        t.malicious.classes.insert(AttackClass::Dt, vec![AttackTemplate { pattern: "{updir}{dt_target}".into(), from_day: 0 }]);
        t.malicious.carriers = vec!["postid".into()];
        t.malicious.extra_pairs = vec![(0, 1.0)];
        t.mutation = Mutation { case_prob: 0.0, encode_prob: 0.0, ..Default::default() };
        t.updir_depth = (4, 4);
        let mix = BTreeMap::from([(AttackClass::Dt, 1.0)]);
        let q = gen_malicious_with(&t, 1, &mix, 0, 0, &HashSet::new()).unwrap();
        assert_eq!(q[0].text, "postid=../../../../etc/passwd");
        assert_eq!(q[0].attack_class, Some(AttackClass::Dt));
    }

    #[test]
    fn sqli_has_padded_union_select() {
        let mix = BTreeMap::from([(AttackClass::Sqli, 1.0)]);
        let qs = gen_malicious(300, &mix, 4).unwrap();
        assert!(qs.iter().any(|q| q.text.contains("union/**/select")));
        assert!(qs.iter().all(|q| q.attack_class == Some(AttackClass::Sqli)));
    }

    #[test]
    fn outputs_survive_filter_and_have_bigrams() {
        let alphabet = Alphabet::new();
        let mix = default_class_mix();
        let qs: Vec<_> = gen_benign(500, 1).into_iter().chain(gen_malicious(500, &mix, 1).unwrap()).collect();
        for q in &qs {
            assert_eq!(char_filter(&q.text), FilterVerdict::Keep, "{}", q.text);
            assert!(q.text.len() >= 4);
            assert!(bigram_vector(&q.text, &alphabet).unwrap().iter().any(|v| *v > 0.0));
            let again = finish(&q.text, 0).unwrap();
            assert_eq!(again, q.text);
        }
    }

    #[test]
    fn corpus_structure() {
        let cfg = small_config(3);
        let c = gen_corpus(&cfg).unwrap();
        assert_eq!(c.initial.len(), 100);
        assert_eq!(c.initial.iter().filter(|q| q.label == Some(Label::Malicious)).count(), 20);
        assert!(c.initial.iter().all(|q| q.day == 0));
        assert_eq!(c.batch_ids(), vec![1, 2, 3]);
        for (day, b) in &c.batches {
            assert_eq!(b.len(), 200);
            assert_eq!(b.iter().filter(|q| q.label == Some(Label::Malicious)).count(), 10);
            assert!(b.iter().all(|q| q.day == *day));
        }
        c.check_labels().unwrap();
    }

    #[test]
    fn same_seed_same_corpus() {
        assert_eq!(gen_corpus(&small_config(5)).unwrap(), gen_corpus(&small_config(5)).unwrap());
        assert_ne!(gen_corpus(&small_config(5)).unwrap(), gen_corpus(&small_config(6)).unwrap());
    }

    #[test]
    fn corpus_round_trips() {
        let c = gen_corpus(&small_config(2)).unwrap();
        let mut buf = Vec::new();
        c.write(&mut buf).unwrap();
        assert_eq!(Corpus::read(&buf[..]).unwrap(), c);
    }

    #[test]
    fn invalid_configs() {
        let cfg = CorpusConfig { batch_size: 5, malicious_per_batch: 6, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = CorpusConfig { class_mix: BTreeMap::from([(AttackClass::Xss, 0.0)]), ..Default::default() };
        assert!(cfg.validate().is_err());
        assert!(TemplateSet::from_json(&BUILTIN_TEMPLATES.replace("{updir}{dt_target}", "{nope}")).is_err());
    }

    #[test]
    fn parse_error_reports_line() {
        let text = "{\"text\":\"postid=1\",\"day\":0}\nnot json\n";
        assert!(matches!(Corpus::read(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }
}
