//! Optional TOML config file. Every key mirrors a command-line flag; flags
//! win when both are given.
//!
//! ```toml
//! seed = 7
//! resolution = 0.2
//!
//! [simulate]
//! scene = "room.scene"
//! out = "session"
//! ground_truth = "truth.ot"
//! [simulate.session]        # simulation parameters
//! mode = "static"
//! motor_step_deg = 3.6
//!
//! [compare]
//! literal = false
//! ratios = "known_only"
//! ```

use std::path::{Path, PathBuf};

use lidarmap::simulator::SimulationConfig;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub resolution: Option<f64>,
    pub simulate: SimulateSection,
    pub build: BuildSection,
    pub filter: FilterSection,
    pub to_octree: ToOctreeSection,
    pub compare: CompareSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub scene: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
    pub session: Option<SimulationConfig>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildSection {
    pub session: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub yaw_source: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub preset: Option<String>,
    pub stages: Option<Vec<String>>,
    pub leaf: Option<f64>,
    pub pass_axis: Option<String>,
    pub pass_min: Option<f64>,
    pub pass_max: Option<f64>,
    pub gauss_sigma: Option<f64>,
    pub gauss_radius: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToOctreeSection {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub origin: Option<[f64; 3]>,
    pub dump: Option<PathBuf>,
    pub prob_hit: Option<f64>,
    pub prob_miss: Option<f64>,
    pub clamp_min: Option<f64>,
    pub clamp_max: Option<f64>,
    pub occupancy_threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub reference: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub out: Option<PathBuf>,
    #[serde(rename = "box")]
    pub bbox: Option<[f64; 6]>,
    pub literal: Option<bool>,
    pub ratios: Option<String>,
    pub csv: Option<PathBuf>,
    pub label: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub resolutions: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub origin: Option<[f64; 3]>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}
