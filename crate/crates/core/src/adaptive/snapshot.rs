use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::runner::RunState;
use crate::error::{Error, Result};

pub const SNAPSHOT_VERSION: u32 = 1;

/// Versioned on-disk form of a [`RunState`], checked against a digest of
/// its training pool on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u32,
    pub pool_digest: String,
    /// Number of batches completed.
    pub next_batch_index: usize,
    pub state: RunState,
}

impl Snapshot {
    pub fn of(state: &RunState) -> Self {
        Snapshot {
            version: SNAPSHOT_VERSION,
            pool_digest: state.pool.digest(),
            next_batch_index: state.reports.len(),
            state: state.clone(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(self)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let snap: Snapshot = serde_json::from_slice(bytes)?;
        if snap.version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!("unsupported snapshot version {}", snap.version)));
        }
        if snap.pool_digest != snap.state.pool.digest() {
            return Err(Error::Snapshot("pool digest does not match pool contents".into()));
        }
        if snap.next_batch_index != snap.state.reports.len() {
            return Err(Error::Snapshot("batch index does not match report count".into()));
        }
        Ok(snap)
    }

    /// Writes through a temporary file so a crash never leaves a torn snapshot.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&self.to_bytes()?)?;
        f.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}
