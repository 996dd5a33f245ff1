//! Reconstruction of 3D occupancy octrees from 2D lidar scans, and
//! octree-based quality metrics for comparing pairs of maps.
//!
//! The crate is organised along the processing chain:
//!
//! - [`geometry`]: scan-sample transform, motor yaw bookkeeping,
//!   covariance-intersection yaw fusion and timestamp stream matching.
//! - [`pointcloud`]: point-cloud container and the down-sampling,
//!   pass-through and Gaussian filters.
//! - [`octree`]: log-odds occupancy octree with ray insertion, voxel
//!   counting and a binary file format.
//! - [`metrics`]: node ratios, per-type and weighted IoU, log-odds error,
//!   correlation and common-node statistics.
//! - [`simulator`]: deterministic scenes, sensor noise, static and trolley
//!   scan generation, ground-truth octrees.
//! - [`reconstruct`] and [`sweep`]: the batch workflows used by the CLI.

pub mod error;
pub mod fmt;
pub mod geometry;
pub mod metrics;
pub mod octree;
pub mod pointcloud;
pub mod reconstruct;
pub mod simulator;
pub mod sweep;

pub use error::{Error, Result};
pub use geometry::Point3;
