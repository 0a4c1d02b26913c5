use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "amods", version, about = "Adaptive malicious-query detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LabelerKind {
    Oracle,
    Service,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn an access log into an unlabeled corpus.
    Ingest {
        log: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Day stamped on every record.
        #[arg(long, default_value_t = 1)]
        day: u32,
        /// Also write queries caught by the character filter here, labeled malicious.
        #[arg(long)]
        flagged: Option<PathBuf>,
    },
    /// Generate a synthetic labeled corpus.
    GenCorpus {
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Overrides corpus.seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train the initial model on the corpus' day-0 set and snapshot it.
    Train {
        #[arg(short, long)]
        config: Option<PathBuf>,
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the adaptive loop over the corpus batches.
    Run {
        #[arg(short, long)]
        config: Option<PathBuf>,
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = LabelerKind::Oracle)]
        labeler: LabelerKind,
        /// Run directory.
        #[arg(short, long)]
        output: PathBuf,
        /// Continue from the newest snapshot in the run directory.
        #[arg(long)]
        resume: bool,
        /// Port for `--labeler service`; overrides service.port.
        #[arg(long)]
        port: Option<u16>,
    },
    /// Run several strategies on the same corpus and seed.
    Compare {
        #[arg(short, long)]
        config: Option<PathBuf>,
        corpus: PathBuf,
        /// Comma-separated, e.g. hybrid,al,random.
        #[arg(long, value_delimiter = ',', required = true)]
        strategies: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score every corpus batch with a snapshot's model.
    Eval {
        snapshot: PathBuf,
        corpus: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// Serve the labeling loop over HTTP.
    Serve {
        #[arg(short, long)]
        config: Option<PathBuf>,
        corpus: PathBuf,
        #[arg(long)]
        port: Option<u16>,
        /// Persist reports and snapshots here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the default configuration document.
    Config,
}
