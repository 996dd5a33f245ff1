//! Synthetic scenes and a lidar model for generating scan logs, estimate
//! streams and reference maps without hardware.
//!
//! All randomness comes from [`rand_chacha::ChaCha8Rng`] seeded with a
//! single `u64`. Each noise source reads its own ChaCha stream (see the
//! `STREAM_*` constants and [`session::STATION_STREAM`]), so adding samples
//! to one source never shifts the draws of another.

mod scan;
mod scene;
mod sensor;
pub mod session;
mod truth;

pub use scan::{
    reported_variance, simulate_static_scan, simulate_trolley_run, steps_per_turn, Mount, StaticScan,
    StreamNoise, TrajectorySpec, TrolleyRun, Waypoint, STREAM_DRIFT, STREAM_POSITION, STREAM_SCAN,
    STREAM_YAW_A, STREAM_YAW_B,
};
pub use scene::{format_scene, parse_scene, raycast, read_scene, Hit, Primitive, Scene, Shape};
pub use sensor::{apply_noise, SensorModel, DEFAULT_RELATIVE_SIGMA, DEFAULT_SIGMA_FLOOR};
pub use session::{simulate_session, write_session, SessionManifest, SessionMode, SessionOutput, SimulationConfig};
pub use truth::ground_truth_octree;
