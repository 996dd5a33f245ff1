//! Simulation sessions: a TOML config in, a directory of logs out.
//!
//! A session directory holds `session.toml` (the manifest read back by the
//! reconstruction step) plus the text logs it names.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scan::{simulate_static_scan, simulate_trolley_run, steps_per_turn, Mount, StreamNoise, TrajectorySpec, Waypoint};
use super::scene::Scene;
use super::sensor::SensorModel;
use crate::error::{Error, Result};
use crate::geometry::scanlog::{format_estimates, format_poses, format_positions, format_scan_log};
use crate::geometry::ScannerPose;

pub const MANIFEST: &str = "session.toml";

/// Static stations draw their scan noise from substream `STATION_STREAM + i`.
pub const STATION_STREAM: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionMode {
    #[default]
    Static,
    Trolley,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub x: f64,
    pub y: f64,
    /// Initial motor yaw, radians.
    #[serde(default)]
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub mode: SessionMode,
    pub sensor: String,
    /// Rotation frequency in Hz; the preset default when absent.
    pub frequency: Option<f64>,
    pub relative_sigma: Option<f64>,
    pub sigma_floor: Option<f64>,
    pub seed: u64,
    /// Scan center height.
    pub height: f64,
    pub stations: Vec<Station>,
    /// Motor step per revolution, degrees. Must divide 360.
    pub motor_step_deg: f64,
    /// Revolutions per station; half a motor turn when absent.
    pub revolutions: Option<usize>,
    pub waypoints: Vec<Waypoint>,
    pub mount_yaw: f64,
    pub noise: StreamNoise,
    /// Largest timestamp difference accepted when pairing streams.
    pub max_skew: f64,
    /// Largest pose gap a scan sample may be interpolated across.
    pub max_gap: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            mode: SessionMode::Static,
            sensor: "sweep_like".into(),
            frequency: None,
            relative_sigma: None,
            sigma_floor: None,
            seed: 0,
            height: 1.0,
            stations: vec![Station { x: 0.0, y: 0.0, yaw: 0.0 }],
            motor_step_deg: 3.6,
            revolutions: None,
            waypoints: Vec::new(),
            mount_yaw: 0.0,
            noise: StreamNoise::default(),
            max_skew: 0.05,
            max_gap: 0.25,
        }
    }
}

impl SimulationConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::param(format!("simulation config: {e}")))
    }

    pub fn sensor_model(&self) -> Result<SensorModel> {
        let mut m = SensorModel::preset(&self.sensor, self.frequency)?;
        if let Some(s) = self.relative_sigma {
            m.relative_sigma = s;
        }
        if let Some(s) = self.sigma_floor {
            m.absolute_sigma_floor = s;
        }
        m.validate()?;
        Ok(m)
    }

    pub fn motor_step(&self) -> f64 {
        self.motor_step_deg.to_radians()
    }

    fn validate(&self) -> Result<()> {
        if !(self.height.is_finite() && self.max_skew > 0.0 && self.max_gap > 0.0) {
            return Err(Error::param("height must be finite, max_skew and max_gap positive"));
        }
        match self.mode {
            SessionMode::Static if self.stations.is_empty() => Err(Error::param("static session needs a station")),
            SessionMode::Trolley if self.waypoints.is_empty() => Err(Error::param("trolley session needs waypoints")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationLog {
    pub x: f64,
    pub y: f64,
    pub log: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrolleyFiles {
    pub scan_log: String,
    pub yaw_a: String,
    pub yaw_b: String,
    pub drift: String,
    pub positions: String,
    pub truth: String,
}

/// What the reconstruction step needs to find and interpret the logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionManifest {
    pub mode: SessionMode,
    pub seed: u64,
    pub height: f64,
    pub max_skew: f64,
    pub max_gap: f64,
    #[serde(default)]
    pub stations: Vec<StationLog>,
    #[serde(default)]
    pub trolley: Option<TrolleyFiles>,
}

impl SessionManifest {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn from_toml(text: &str, name: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: name.to_string(),
            line: 0,
            msg: e.to_string(),
        })
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Self::from_toml(&text, &path.display().to_string())
    }
}

/// A finished session held in memory: file name and contents pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutput {
    pub manifest: SessionManifest,
    pub files: Vec<(String, String)>,
    pub sample_count: usize,
}

pub fn simulate_session(scene: &Scene, cfg: &SimulationConfig) -> Result<SessionOutput> {
    cfg.validate()?;
    let model = cfg.sensor_model()?;
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut files = Vec::new();
    let mut manifest = SessionManifest {
        mode: cfg.mode,
        seed: cfg.seed,
        height: cfg.height,
        max_skew: cfg.max_skew,
        max_gap: cfg.max_gap,
        stations: Vec::new(),
        trolley: None,
    };
    let mut sample_count = 0;
    match cfg.mode {
        SessionMode::Static => {
            let dphi = cfg.motor_step();
            let revolutions = match cfg.revolutions {
                Some(r) => r,
                None => steps_per_turn(dphi)?.div_ceil(2),
            };
            for (i, st) in cfg.stations.iter().enumerate() {
                let pose = ScannerPose::new(st.x, st.y, st.yaw).with_height(cfg.height);
                if !scene.contains(&pose.center()) {
                    return Err(Error::param(format!("station {i} lies outside the scene bounds")));
                }
                let mut rng = base.clone();
                rng.set_stream(STATION_STREAM + i as u64);
                rng.set_word_pos(0);
                let scan = simulate_static_scan(scene, pose, &model, dphi, revolutions, &mut rng)?;
                let name = format!("scan_{i:03}.log");
                sample_count += scan.records.len();
                files.push((name.clone(), format_scan_log(&scan.records)));
                manifest.stations.push(StationLog { x: st.x, y: st.y, log: name });
            }
        }
        SessionMode::Trolley => {
            let traj = TrajectorySpec::new(cfg.waypoints.clone())?;
            let mount = Mount {
                height: cfg.height,
                yaw_offset: cfg.mount_yaw,
            };
            let run = simulate_trolley_run(scene, &traj, &model, &mount, &cfg.noise, &base)?;
            sample_count = run.records.len();
            let names = TrolleyFiles {
                scan_log: "scan_trolley.log".into(),
                yaw_a: "yaw_a.txt".into(),
                yaw_b: "yaw_b.txt".into(),
                drift: "drift.txt".into(),
                positions: "position.txt".into(),
                truth: "truth.txt".into(),
            };
            files.push((names.scan_log.clone(), format_scan_log(&run.records)));
            files.push((names.yaw_a.clone(), format_estimates(&run.yaw_a)));
            files.push((names.yaw_b.clone(), format_estimates(&run.yaw_b)));
            files.push((names.drift.clone(), format_estimates(&run.drift)));
            files.push((names.positions.clone(), format_positions(&run.positions)));
            files.push((names.truth.clone(), format_poses(&run.truth)));
            manifest.trolley = Some(names);
        }
    }
    Ok(SessionOutput {
        manifest,
        files,
        sample_count,
    })
}

/// Writes the logs and then the manifest into `dir`, creating it if needed.
pub fn write_session(dir: &Path, out: &SessionOutput) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, text) in &out.files {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
    }
    let p = dir.join(MANIFEST);
    std::fs::write(&p, out.manifest.to_toml()).map_err(|e| Error::io(&p, e))
}
