//! Run manifests.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::plan::Plan;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    /// Resolved settings; replaying them reproduces the artifacts.
    pub plan: Plan,
    pub seeds: Vec<u64>,
    pub inputs: Vec<PathBuf>,
    pub artifacts: Vec<PathBuf>,
    /// Unix time at start, seconds.
    pub started_at: f64,
    pub wall_clock_s: f64,
}
