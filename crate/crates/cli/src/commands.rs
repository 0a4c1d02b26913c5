use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use amods::adaptive::{compute_metrics, tune_meta, BatchReport, RunConfig, RunState, Snapshot, Strategy};
use amods::corpus::{gen_corpus, Corpus};
use amods::ingest::{ingest_log, Label};
use amods::svm::KernelSpec;
use anyhow::{anyhow, Context};
use serde_json::json;

use crate::api::{router, AppState};
use crate::cli::{Cli, Command, LabelerKind};
use crate::config::CliConfig;
use crate::rundir::RunDir;
use crate::session::Session;

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad input files, configs or corpora (exit 2).
    Data(anyhow::Error),
    /// Anything that broke while running (exit 3).
    Runtime(anyhow::Error),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Data(e) | Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

pub fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Data(_) => 2,
        Failure::Runtime(_) => 3,
    }
}

fn data<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Data)
}

/// Core errors are data errors unless they come from the labeler.
fn classify(e: anyhow::Error) -> Failure {
    match e.downcast_ref::<amods::Error>() {
        Some(amods::Error::LabelerUnavailable(_)) | None => Failure::Runtime(e),
        Some(_) => Failure::Data(e),
    }
}

pub fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Ingest { log, output, config, day, flagged } => ingest(&log, &output, config.as_deref(), day, flagged.as_deref()),
        Command::GenCorpus { config, output, seed } => generate(config.as_deref(), &output, seed),
        Command::Train { config, corpus, output } => train(config.as_deref(), &corpus, &output),
        Command::Run { config, corpus, labeler, output, resume, port } => {
            run(config.as_deref(), &corpus, labeler, &output, resume, port)
        }
        Command::Compare { config, corpus, strategies, output } => compare(config.as_deref(), &corpus, &strategies, &output),
        Command::Eval { snapshot, corpus, beta } => eval(&snapshot, &corpus, beta),
        Command::Serve { config, corpus, port, output } => serve(config.as_deref(), &corpus, port, output.as_deref()),
        Command::Config => {
            println!("{}", serde_json::to_string_pretty(&CliConfig::default()).expect("serializable"));
            Ok(())
        }
    }
}

fn write_jsonl<'a>(path: &Path, records: impl Iterator<Item = &'a amods::NormalizedQuery>) -> anyhow::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for q in records {
        serde_json::to_writer(&mut w, q)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn ingest(log: &Path, output: &Path, config: Option<&Path>, day: u32, flagged: Option<&Path>) -> Result<(), Failure> {
    let cfg = data(CliConfig::load(config))?;
    let file = data(fs::File::open(log).with_context(|| format!("opening {}", log.display())))?;
    let out = ingest_log(BufReader::new(file), day, &cfg.ingest).map_err(|e| classify(e.into()))?;
    data(write_jsonl(output, out.queries.iter()))?;
    if let Some(path) = flagged {
        data(write_jsonl(path, out.flagged.iter()))?;
    }
    println!("{}", serde_json::to_string(&out.stats).expect("serializable"));
    Ok(())
}

fn generate(config: Option<&Path>, output: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let mut cfg = data(CliConfig::load(config))?;
    if let Some(s) = seed {
        cfg.corpus.seed = s;
    }
    let corpus = gen_corpus(&cfg.corpus).map_err(|e| classify(e.into()))?;
    data(corpus.save(output).with_context(|| format!("writing {}", output.display())))?;
    let malicious = corpus.records().filter(|q| q.label == Some(Label::Malicious)).count();
    println!(
        "{}",
        json!({ "records": corpus.records().count(), "malicious": malicious, "batches": corpus.batches.len() })
    );
    Ok(())
}

fn load_corpus(path: &Path) -> Result<Corpus, Failure> {
    let corpus = data(Corpus::load(path).with_context(|| format!("reading corpus {}", path.display())))?;
    data(corpus.check_labels().map_err(Into::into))?;
    Ok(corpus)
}

/// Run configuration with the grid-search pick applied when enabled.
fn effective_run_config(cfg: &CliConfig, corpus: &Corpus) -> Result<RunConfig, Failure> {
    let mut run = cfg.run.clone();
    if cfg.grid_search.enabled {
        let (c, gamma) =
            tune_meta(&corpus.initial, &run, &cfg.grid_search.c, &cfg.grid_search.gamma).map_err(|e| classify(e.into()))?;
        eprintln!("grid search picked C={c} gamma={gamma}");
        run.meta.c = c;
        run.meta.kernel = KernelSpec::Rbf { gamma };
    }
    Ok(run)
}

fn batches_for(run: &RunConfig, corpus: &Corpus) -> Result<Vec<(u32, Vec<amods::NormalizedQuery>)>, Failure> {
    let batches = corpus.select(&run.batches).map_err(|e| classify(e.into()))?;
    if batches.is_empty() {
        return Err(Failure::Data(anyhow!("corpus has no batches")));
    }
    Ok(batches)
}

fn train(config: Option<&Path>, corpus: &Path, output: &Path) -> Result<(), Failure> {
    let cfg = data(CliConfig::load(config))?;
    let corpus = load_corpus(corpus)?;
    let run = effective_run_config(&cfg, &corpus)?;
    let state = RunState::start(run, &corpus.initial).map_err(|e| classify(e.into()))?;
    data(Snapshot::of(&state).save(output).with_context(|| format!("writing {}", output.display())))?;
    println!("{}", json!({ "pool_size": state.pool.len(), "snapshot": output }));
    Ok(())
}

fn start_or_resume(
    cfg: &CliConfig,
    corpus: &Corpus,
    dir: &RunDir,
    resume: bool,
) -> Result<RunState, Failure> {
    if resume {
        if let Some(snap) = data(dir.load_latest())? {
            data(dir.rewrite_log(&snap.state.reports))?;
            eprintln!("resuming after {} completed batches", snap.state.reports.len());
            return Ok(snap.state);
        }
    }
    let run = effective_run_config(cfg, corpus)?;
    let state = RunState::start(run, &corpus.initial).map_err(|e| classify(e.into()))?;
    data(dir.record_start(&state))?;
    Ok(state)
}

fn run(
    config: Option<&Path>,
    corpus_path: &Path,
    labeler: LabelerKind,
    output: &Path,
    resume: bool,
    port: Option<u16>,
) -> Result<(), Failure> {
    let cfg = data(CliConfig::load(config))?;
    let corpus = load_corpus(corpus_path)?;
    let dir = data(RunDir::open(output, resume))?;
    let mut state = start_or_resume(&cfg, &corpus, &dir, resume)?;
    let batches = batches_for(&state.config, &corpus)?;

    match labeler {
        LabelerKind::Oracle => {
            let mut oracle = corpus.oracle();
            for (id, queries) in batches.iter().skip(state.reports.len()) {
                let report = state.step(*id, queries, &mut oracle, &mut |_| {}).map_err(|e| classify(e.into()))?.clone();
                eprintln!(
                    "batch {}: F={:.4} fp_rate={} malicious_obtained={} pool={}",
                    report.batch,
                    report.metrics.f_value,
                    report.fp_rate.map_or("n/a".into(), |r| format!("{r:.5}")),
                    report.malicious_obtained,
                    report.pool_size
                );
                data(dir.record_batch(&state, &report))?;
            }
            println!("{}", json!({ "batches": state.reports.len(), "run_dir": output }));
            Ok(())
        }
        LabelerKind::Service => {
            let port = port.unwrap_or(cfg.service.port);
            serve_session(&cfg, state, batches, Some(dir), port)
        }
    }
}

fn compare(config: Option<&Path>, corpus: &Path, strategies: &[String], output: &Path) -> Result<(), Failure> {
    let cfg = data(CliConfig::load(config))?;
    let corpus = load_corpus(corpus)?;
    let parsed = strategies
        .iter()
        .map(|s| Strategy::parse(s).ok_or_else(|| Failure::Data(anyhow!("unknown strategy {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let base = effective_run_config(&cfg, &corpus)?;
    let batches = batches_for(&base, &corpus)?;
    let mut results = Vec::new();
    for strategy in parsed {
        let config = RunConfig { strategy, ..base.clone() };
        let mut oracle = corpus.oracle();
        let reports = amods::adaptive::run_loop(config, &corpus.initial, &batches, &mut oracle)
            .map_err(|e| classify(e.into()))?;
        eprintln!("{}: done", strategy.name());
        results.push(summary(strategy, &reports));
    }
    let doc = json!({ "seed": base.seed, "meta": base.meta, "strategies": results });
    data(fs::write(output, serde_json::to_vec_pretty(&doc).expect("serializable")).map_err(Into::into))?;
    Ok(())
}

fn summary(strategy: Strategy, reports: &[BatchReport]) -> serde_json::Value {
    json!({
        "strategy": strategy.name(),
        "final_f_value": reports.last().map(|r| r.metrics.f_value),
        "final_fp_rate": reports.last().and_then(|r| r.fp_rate),
        "malicious_obtained": reports.iter().map(|r| r.malicious_obtained).sum::<usize>(),
        "labeled": reports.iter().map(|r| r.selection.queries.len()).sum::<usize>(),
        "reports": reports,
    })
}

fn eval(snapshot: &Path, corpus: &Path, beta: f64) -> Result<(), Failure> {
    let snap = data(Snapshot::load(snapshot).with_context(|| format!("loading {}", snapshot.display())))?;
    let corpus = load_corpus(corpus)?;
    let detector = &snap.state.detector;
    let (mut all_p, mut all_t) = (Vec::new(), Vec::new());
    for (id, queries) in &corpus.batches {
        let texts: Vec<&str> = queries.iter().map(|q| q.text.as_str()).collect();
        let scored = detector.score(&texts).map_err(|e| classify(e.into()))?;
        let (p, t): (Vec<Label>, Vec<Label>) = scored
            .f
            .iter()
            .zip(queries)
            .filter_map(|(f, q)| q.label.map(|l| (Label::from_decision(*f), l)))
            .unzip();
        let m = compute_metrics(&p, &t, beta).map_err(|e| classify(e.into()))?;
        let flagged = scored.f.iter().filter(|f| **f > 0.0).count();
        println!("{}", json!({ "batch": id, "queries": queries.len(), "flagged": flagged, "metrics": m }));
        all_p.extend(p);
        all_t.extend(t);
    }
    let overall = compute_metrics(&all_p, &all_t, beta).map_err(|e| classify(e.into()))?;
    println!("{}", json!({ "batch": "all", "metrics": overall }));
    Ok(())
}

fn session_id() -> String {
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
    format!("s{:x}{:x}", nanos, std::process::id())
}

fn serve(config: Option<&Path>, corpus_path: &Path, port: Option<u16>, output: Option<&Path>) -> Result<(), Failure> {
    let cfg = data(CliConfig::load(config))?;
    let corpus = load_corpus(corpus_path)?;
    let dir = output.map(|o| RunDir::open(o, false)).transpose().map_err(Failure::Data)?;
    let run = effective_run_config(&cfg, &corpus)?;
    let state = RunState::start(run, &corpus.initial).map_err(|e| classify(e.into()))?;
    if let Some(d) = &dir {
        data(d.record_start(&state))?;
    }
    let batches = batches_for(&state.config, &corpus)?;
    serve_session(&cfg, state, batches, dir, port.unwrap_or(cfg.service.port))
}

fn serve_session(
    cfg: &CliConfig,
    state: RunState,
    batches: Vec<(u32, Vec<amods::NormalizedQuery>)>,
    dir: Option<RunDir>,
    port: u16,
) -> Result<(), Failure> {
    let session = Session::new(session_id(), state, batches, dir)
        .map_err(|e| Failure::Runtime(anyhow!("preparing first batch: {e:?}")))?;
    let app_state = AppState {
        session: Arc::new(Mutex::new(session)),
        advance_timeout: Duration::from_secs(cfg.service.advance_timeout_secs),
    };
    let addr = format!("{}:{}", cfg.service.host, port);
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Runtime(e.into()))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr).await.with_context(|| format!("binding {addr}"))?;
        eprintln!("serving on http://{}", listener.local_addr()?);
        axum::serve(listener, router(app_state)).await?;
        Ok::<_, anyhow::Error>(())
    })
    .map_err(Failure::Runtime)
}
