use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const TOOL_VERSION: &str = concat!("pesinlab ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub system: String,
    pub seed: u64,
    pub out: String,
    /// Every parameter the command read, with defaults filled in.
    pub params: Value,
}

/// One line of the record file. Only the timestamps differ between two runs
/// of the same config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub started_at: String,
    pub finished_at: String,
    pub tool_version: String,
    pub result: Value,
}

pub fn append(path: &Path, record: &RunRecord) -> anyhow::Result<String> {
    let line = serde_json::to_string(record)?;
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{line}")?;
    Ok(line)
}
