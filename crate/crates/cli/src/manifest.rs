use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use detqpe::qpe::QpeMode;
use detqpe::TermOrdering;
use serde::{Deserialize, Serialize};

pub const CSV_NAME: &str = "distribution.csv";
pub const DISTRIBUTION_NAME: &str = "distribution.json";
pub const REPORT_NAME: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub csv: PathBuf,
    pub distribution: PathBuf,
    pub report: PathBuf,
}

impl Outputs {
    pub fn in_dir(dir: &Path) -> Self {
        Outputs {
            csv: dir.join(CSV_NAME),
            distribution: dir.join(DISTRIBUTION_NAME),
            report: dir.join(REPORT_NAME),
        }
    }
}

/// Everything needed to reproduce a run; echoed into every JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub input: PathBuf,
    /// `None` means the Hartree-Fock determinant.
    pub ansatz: Option<PathBuf>,
    pub precision_bits: u32,
    pub trotter_steps: u32,
    pub time: f64,
    pub mode: QpeMode,
    pub ordering: TermOrdering,
    pub threshold: f64,
    pub window: Option<Window>,
    pub outputs: Outputs,
    pub seed: Option<u64>,
}

/// Reads a bare manifest or the `manifest` field of a JSON output.
pub fn load(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let inner = value.get("manifest").cloned().unwrap_or(value);
    serde_json::from_value(inner).with_context(|| format!("{} does not hold a run manifest", path.display()))
}
