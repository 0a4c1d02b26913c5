#![allow(dead_code)]

use std::path::{Path, PathBuf};

use amods::corpus::{gen_corpus, Corpus};
use amods_cli::config::CliConfig;
use serde_json::json;

/// Small enough to run a few batches in seconds.
pub fn config_json() -> serde_json::Value {
    json!({
        "corpus": { "batches": 3, "batch_size": 250, "malicious_per_batch": 10, "seed": 11 },
        "run": {
            "seed": 3,
            "budget": { "m": 12 },
            "pipeline": { "k": 150, "d": 12 },
            "bases": [
                { "kind": "random_forest", "trees": 8, "max_depth": 6, "seed": 0 },
                { "kind": "logistic", "l2": 0.001, "max_iter": 100 },
                { "kind": "mlp", "hidden": [6], "learning_rate": 0.05, "epochs": 10, "seed": 0 }
            ]
        }
    })
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub config_path: PathBuf,
    pub corpus_path: PathBuf,
    pub config: CliConfig,
    pub corpus: Corpus,
}

impl Fixture {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("config.json");
        std::fs::write(&config_path, serde_json::to_vec_pretty(&config_json()).unwrap()).unwrap();
        let config = CliConfig::load(Some(&config_path)).unwrap();
        let corpus = gen_corpus(&config.corpus).unwrap();
        let corpus_path = dir.path().join("corpus.jsonl");
        corpus.save(&corpus_path).unwrap();
        Fixture { dir, config_path, corpus_path, config, corpus }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

pub fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("reading {}: {e}", p.display()))
}
