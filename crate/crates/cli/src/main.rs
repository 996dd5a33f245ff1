//! `lidarmap`: simulate scans, rebuild point clouds, filter them, convert
//! them to octrees and compare maps.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(lidarmap::Error),
}

impl From<lidarmap::Error> for CliError {
    fn from(e: lidarmap::Error) -> Self {
        match e {
            lidarmap::Error::Parameter(msg) => CliError::Usage(msg),
            other => CliError::Data(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lidarmap", version, about = "2D-lidar 3D mapping and octree map comparison")]
pub struct Cli {
    /// TOML file with defaults for any flag.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for all simulated noise.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Octree voxel size in meters.
    #[arg(long, global = true, value_name = "M")]
    pub resolution: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate scan logs and estimate streams from a scene file.
    Simulate(SimulateArgs),
    /// Rebuild a point cloud from a simulated session directory.
    Build(BuildArgs),
    /// Run a filter pipeline over a point cloud.
    Filter(FilterArgs),
    /// Convert a point cloud into an occupancy octree.
    ToOctree(ToOctreeArgs),
    /// Compare a target octree against a reference.
    Compare(CompareArgs),
    /// Convert one cloud at several resolutions and time it.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scene description (boxes, planes, bounds).
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Output session directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `static` or `trolley`.
    #[arg(long)]
    pub mode: Option<String>,
    /// `sweep_like` or `rplidar_like`.
    #[arg(long)]
    pub sensor: Option<String>,
    /// Also rasterize the scene into a reference octree.
    #[arg(long, value_name = "PATH")]
    pub ground_truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Session directory written by `simulate`.
    #[arg(long)]
    pub session: Option<PathBuf>,
    /// Output point cloud.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Yaw used for trolley sessions: fused, a, b, drift or truth.
    #[arg(long)]
    pub yaw_source: Option<String>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Input point cloud.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output point cloud.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// none, map1, map2, map3, ref (or pc1..pc4).
    #[arg(long)]
    pub preset: Option<String>,
    /// Explicit stage, e.g. `downsample:0.05`, `passthrough:z:-1:3`,
    /// `gaussian:0.02:0.06`. Repeatable; overrides the preset.
    #[arg(long = "stage")]
    pub stages: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ToOctreeArgs {
    /// Input point cloud.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output octree file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sensor origin for clouds without per-point origins: `x,y,z`.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    pub origin: Option<[f64; 3]>,
    /// Also write a text listing of the leaves.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Reference octree.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Octree under evaluation.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Evaluation box `x0,y0,z0,x1,y1,z1`; the union of both maps' extents
    /// when absent.
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub bbox: Option<[f64; 6]>,
    /// Low-coverage weighted IoU without renormalization.
    #[arg(long)]
    pub literal: bool,
    /// Ratio set in the CSV row: full_box or known_only.
    #[arg(long)]
    pub ratios: Option<String>,
    /// Append a CSV row to this file (header written when new).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// First column of the CSV row.
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Input point cloud.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Comma-separated voxel sizes in meters.
    #[arg(long, value_delimiter = ',')]
    pub resolutions: Vec<f64>,
    /// Conversions per resolution; the median time is reported.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Sensor origin for clouds without per-point origins: `x,y,z`.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    pub origin: Option<[f64; 3]>,
    /// Also write the table here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| format!("expected {N} comma-separated numbers"))
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    parse_floats::<3>(s)
}

fn parse_box(s: &str) -> Result<[f64; 6], String> {
    parse_floats::<6>(s)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lidarmap: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
