//! The record that fully determines a run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::io::ARTIFACT_VERSION;
use super::run::PipelineError;
use crate::optimize::OptimConfig;
use crate::quality::Region;
use crate::spaces::SpaceDescriptor;
use crate::weights::WeightRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    #[default]
    Generate,
    Analyze,
    Verify,
    Sweep,
    DensityCheck,
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Command::Generate => "generate",
            Command::Analyze => "analyze",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
            Command::DensityCheck => "density-check",
        })
    }
}

/// Everything a command reads. Same manifest, same bytes out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunManifest {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceDescriptor>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_schedule: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightRecord>,
    /// Density expression for `density-check`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regions: Option<Vec<Region>>,
    pub optim: OptimConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub plot_data: bool,
    pub seed: u64,
    pub version: String,
}

impl Default for RunManifest {
    fn default() -> Self {
        Self {
            command: Command::default(),
            space: None,
            n: None,
            n_list: None,
            s: None,
            s_schedule: None,
            weight: None,
            density: None,
            regions: None,
            optim: OptimConfig::default(),
            probes: None,
            input: None,
            out: None,
            plot_data: false,
            seed: 0,
            version: ARTIFACT_VERSION.to_string(),
        }
    }
}

impl RunManifest {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            ..Self::default()
        }
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| {
            PipelineError::Usage(format!("malformed manifest {}: {e}", path.display()))
        })
    }

    /// The N values of the run: `n_list` if given, else `[n]`.
    pub fn sizes(&self) -> Vec<usize> {
        match (&self.n_list, self.n) {
            (Some(list), _) => list.clone(),
            (None, Some(n)) => vec![n],
            (None, None) => Vec::new(),
        }
    }

    pub(crate) fn require_space(&self) -> Result<SpaceDescriptor, PipelineError> {
        self.space
            .ok_or_else(|| PipelineError::Usage(format!("{} needs --space", self.command)))
    }

    pub(crate) fn require_s(&self) -> Result<f64, PipelineError> {
        self.s
            .ok_or_else(|| PipelineError::Usage(format!("{} needs --s", self.command)))
    }

    pub(crate) fn require_out(&self) -> Result<&Path, PipelineError> {
        self.out
            .as_deref()
            .ok_or_else(|| PipelineError::Usage(format!("{} needs --out", self.command)))
    }

    pub(crate) fn require_sizes(&self) -> Result<Vec<usize>, PipelineError> {
        let sizes = self.sizes();
        if sizes.is_empty() {
            return Err(PipelineError::Usage(format!(
                "{} needs --n or --n-list",
                self.command
            )));
        }
        if let Some(&n) = sizes.iter().find(|&&n| n < 2) {
            return Err(PipelineError::Usage(format!(
                "N must be at least 2, got {n}"
            )));
        }
        Ok(sizes)
    }
}
