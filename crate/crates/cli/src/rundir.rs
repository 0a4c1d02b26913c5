use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use amods::adaptive::{BatchReport, RunState, Snapshot};
use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

/// Layout: `run.log` (one report per line), `report-<batch>.json`,
/// `snapshot-<batch>.json` and `latest.json` naming the newest snapshot.
/// The snapshot written right after initial training is `snapshot-0.json`.
#[derive(Clone, Debug)]
pub struct RunDir {
    path: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
struct Latest {
    snapshot: String,
    completed: usize,
}

impl RunDir {
    /// Opens a run directory. Without `resume` it must not already hold a run.
    pub fn open(path: &Path, resume: bool) -> anyhow::Result<Self> {
        fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
        let dir = RunDir { path: path.to_owned() };
        if !resume && dir.path.join("latest.json").exists() {
            bail!("{} already holds a run; pass --resume to continue it", path.display());
        }
        Ok(dir)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn snapshot_path(&self, batch: u32) -> PathBuf {
        self.path.join(format!("snapshot-{batch}.json"))
    }

    pub fn report_path(&self, batch: u32) -> PathBuf {
        self.path.join(format!("report-{batch}.json"))
    }

    pub fn log_path(&self) -> PathBuf {
        self.path.join("run.log")
    }

    /// Latest snapshot, if any.
    pub fn load_latest(&self) -> anyhow::Result<Option<Snapshot>> {
        let latest = self.path.join("latest.json");
        if !latest.exists() {
            return Ok(None);
        }
        let l: Latest = serde_json::from_slice(&fs::read(&latest)?).context("reading latest.json")?;
        let snap = Snapshot::load(&self.path.join(&l.snapshot)).with_context(|| format!("loading {}", l.snapshot))?;
        if snap.state.reports.len() != l.completed {
            bail!("latest.json disagrees with {}", l.snapshot);
        }
        Ok(Some(snap))
    }

    fn point_latest(&self, name: String, completed: usize) -> anyhow::Result<()> {
        let tmp = self.path.join("latest.json.tmp");
        fs::write(&tmp, serde_json::to_vec(&Latest { snapshot: name, completed })?)?;
        fs::rename(tmp, self.path.join("latest.json"))?;
        Ok(())
    }

    /// Snapshot of a freshly trained state; also resets the log.
    pub fn record_start(&self, state: &RunState) -> anyhow::Result<()> {
        Snapshot::of(state).save(&self.snapshot_path(0))?;
        fs::write(self.log_path(), b"")?;
        self.point_latest("snapshot-0.json".into(), 0)
    }

    /// Persists the state after a batch: log line, report, snapshot, pointer.
    pub fn record_batch(&self, state: &RunState, report: &BatchReport) -> anyhow::Result<()> {
        let mut log = OpenOptions::new().create(true).append(true).open(self.log_path())?;
        serde_json::to_writer(&mut log, report)?;
        log.write_all(b"\n")?;
        fs::write(self.report_path(report.batch), serde_json::to_vec_pretty(report)?)?;
        Snapshot::of(state).save(&self.snapshot_path(report.batch))?;
        self.point_latest(format!("snapshot-{}.json", report.batch), state.reports.len())
    }

    /// Rewrites `run.log` from a snapshot's reports, dropping lines written
    /// after that snapshot.
    pub fn rewrite_log(&self, reports: &[BatchReport]) -> anyhow::Result<()> {
        let mut out = Vec::new();
        for r in reports {
            serde_json::to_writer(&mut out, r)?;
            out.push(b'\n');
        }
        fs::write(self.log_path(), out)?;
        Ok(())
    }
}
