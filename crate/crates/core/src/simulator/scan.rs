//! Static turntable scans and moving trolley runs.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::scene::{raycast, Scene};
use super::sensor::{apply_noise, SensorModel};
use crate::error::{Error, Result};
use crate::geometry::scanlog::{PositionEstimate, ScanRecord, TrolleyPose};
use crate::geometry::{
    advance_motor_yaw, angle_diff, beam_direction, normalize_angle, wrap_pi, GaussianScalarEstimate,
    ScanSample, ScannerPose,
};

/// Number of motor steps in a full turn; `dphi` must divide 2π.
pub fn steps_per_turn(dphi: f64) -> Result<usize> {
    if !(dphi > 0.0 && dphi <= TAU) {
        return Err(Error::param(format!("motor step {dphi} must lie in (0, 2π]")));
    }
    let n = TAU / dphi;
    let r = n.round();
    if (n - r).abs() > 1e-9 * n {
        return Err(Error::param(format!("motor step {dphi} does not divide 2π")));
    }
    Ok(r as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticScan {
    pub records: Vec<ScanRecord>,
    pub final_pose: ScannerPose,
}

/// Samples `revolutions` full turns of the scan head. Each revolution sweeps
/// bearings `2πk/n`; the motor steps by `dphi` once per revolution, while
/// the blocked beam passes straight down, so the second half of every
/// revolution is measured at the stepped yaw.
pub fn simulate_static_scan(
    scene: &Scene,
    pose: ScannerPose,
    model: &SensorModel,
    dphi: f64,
    revolutions: usize,
    rng: &mut ChaCha8Rng,
) -> Result<StaticScan> {
    model.validate()?;
    steps_per_turn(dphi)?;
    let n = model.samples_per_rev;
    let rate = model.sample_rate();
    let center = pose.center();
    let mut current = pose;
    let mut records = Vec::with_capacity(n * revolutions);
    for rev in 0..revolutions {
        for k in 0..n {
            let bearing = TAU * k as f64 / n as f64;
            let sample = ScanSample {
                bearing,
                range: 1.0,
                timestamp: (rev * n + k) as f64 / rate,
                motor_step: dphi,
            };
            let dir = beam_direction(bearing, sample.effective_yaw(current.yaw()));
            let Some(hit) = raycast(scene, &center, &dir)? else {
                continue;
            };
            if let Some(range) = apply_noise(model, hit.distance, rng) {
                records.push(ScanRecord {
                    sample: ScanSample { range, ..sample },
                    motor_yaw: current.yaw(),
                });
            }
        }
        current = advance_motor_yaw(current, dphi);
    }
    Ok(StaticScan {
        records,
        final_pose: current,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub t: f64,
}

/// Piecewise-linear trajectory; yaw takes the short way round.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    waypoints: Vec<Waypoint>,
}

impl TrajectorySpec {
    pub fn new(waypoints: Vec<Waypoint>) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::param("trajectory needs at least one waypoint"));
        }
        if waypoints.iter().any(|w| !(w.x.is_finite() && w.y.is_finite() && w.yaw.is_finite() && w.t.is_finite())) {
            return Err(Error::param("non-finite waypoint"));
        }
        if waypoints.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::param("waypoint times must be strictly increasing"));
        }
        Ok(TrajectorySpec { waypoints })
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn start(&self) -> f64 {
        self.waypoints[0].t
    }

    pub fn end(&self) -> f64 {
        self.waypoints[self.waypoints.len() - 1].t
    }

    /// Pose at time `t`, held constant outside the waypoint span. Yaw is
    /// wrapped into `(-π, π]`.
    pub fn pose_at(&self, t: f64) -> TrolleyPose {
        let w = &self.waypoints;
        let i = w.partition_point(|p| p.t <= t);
        let (x, y, yaw) = if i == 0 {
            (w[0].x, w[0].y, w[0].yaw)
        } else if i == w.len() {
            let l = w[w.len() - 1];
            (l.x, l.y, l.yaw)
        } else {
            let (a, b) = (w[i - 1], w[i]);
            let s = (t - a.t) / (b.t - a.t);
            (
                a.x + s * (b.x - a.x),
                a.y + s * (b.y - a.y),
                a.yaw + s * angle_diff(b.yaw, a.yaw),
            )
        };
        TrolleyPose {
            x,
            y,
            yaw: wrap_pi(yaw),
            timestamp: t,
        }
    }
}

/// How the mapping scanner sits on the trolley.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mount {
    /// Scan center height above the ground.
    pub height: f64,
    /// Added to the trolley heading. 0 puts the scan plane across the
    /// direction of travel.
    pub yaw_offset: f64,
}

impl Default for Mount {
    fn default() -> Self {
        Mount {
            height: 1.0,
            yaw_offset: 0.0,
        }
    }
}

/// Noise and rates of the pose estimate streams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StreamNoise {
    pub yaw_a_sigma: f64,
    pub yaw_a_rate: f64,
    pub yaw_b_sigma: f64,
    pub yaw_b_rate: f64,
    pub position_sigma: f64,
    pub position_rate: f64,
    /// Constant gyro bias of the integrated stream, rad/s.
    pub drift_rate: f64,
    /// Random-walk density of the integrated stream, rad/√s.
    pub drift_walk: f64,
    /// Sample rate of the integrated stream and of the truth poses.
    pub drift_sample_rate: f64,
}

impl Default for StreamNoise {
    fn default() -> Self {
        StreamNoise {
            yaw_a_sigma: 0.04,
            yaw_a_rate: 50.0,
            yaw_b_sigma: 0.03,
            yaw_b_rate: 10.0,
            position_sigma: 0.02,
            position_rate: 10.0,
            drift_rate: 0.005,
            drift_walk: 0.002,
            drift_sample_rate: 50.0,
        }
    }
}

impl StreamNoise {
    pub fn noiseless() -> Self {
        StreamNoise {
            yaw_a_sigma: 0.0,
            yaw_b_sigma: 0.0,
            position_sigma: 0.0,
            drift_rate: 0.0,
            drift_walk: 0.0,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let sig = [self.yaw_a_sigma, self.yaw_b_sigma, self.position_sigma, self.drift_rate.abs(), self.drift_walk];
        let rates = [self.yaw_a_rate, self.yaw_b_rate, self.position_rate, self.drift_sample_rate];
        if sig.iter().any(|s| !(s.is_finite() && *s >= 0.0)) || rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::param("stream sigmas must be >= 0 and rates > 0"));
        }
        Ok(())
    }
}

/// Variance reported for a stream with standard deviation `sigma`. A
/// noiseless stream still claims a tiny variance so that fusion stays
/// defined.
pub fn reported_variance(sigma: f64) -> f64 {
    sigma.max(1e-6).powi(2)
}

/// Everything one trolley run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct TrolleyRun {
    pub records: Vec<ScanRecord>,
    pub yaw_a: Vec<GaussianScalarEstimate>,
    pub yaw_b: Vec<GaussianScalarEstimate>,
    pub drift: Vec<GaussianScalarEstimate>,
    pub positions: Vec<PositionEstimate>,
    pub truth: Vec<TrolleyPose>,
}

/// Substream indices, so each noise source is independent of the others'
/// sample counts.
pub const STREAM_SCAN: u64 = 0;
pub const STREAM_YAW_A: u64 = 1;
pub const STREAM_YAW_B: u64 = 2;
pub const STREAM_POSITION: u64 = 3;
pub const STREAM_DRIFT: u64 = 4;

fn substream(base: &ChaCha8Rng, index: u64) -> ChaCha8Rng {
    let mut r = base.clone();
    r.set_stream(index);
    r.set_word_pos(0);
    r
}

fn ticks(start: f64, end: f64, rate: f64) -> impl Iterator<Item = f64> {
    let n = ((end - start) * rate + 1e-9).floor() as usize;
    (0..=n).map(move |i| start + i as f64 / rate)
}

/// Pushes the trolley along `traj`. The mapping scanner spins continuously
/// in its vertical plane; every sample is taken at the pose of its own
/// timestamp. The yaw, position and drift streams are generated from the
/// true trajectory.
pub fn simulate_trolley_run(
    scene: &Scene,
    traj: &TrajectorySpec,
    model: &SensorModel,
    mount: &Mount,
    noise: &StreamNoise,
    rng: &ChaCha8Rng,
) -> Result<TrolleyRun> {
    model.validate()?;
    noise.validate()?;
    for w in traj.waypoints() {
        let p = crate::Point3::new(w.x, w.y, mount.height);
        if !scene.contains(&p) {
            return Err(Error::param(format!(
                "waypoint at t={} ({}, {}) leaves the scene bounds",
                w.t, w.x, w.y
            )));
        }
    }
    let (t0, t1) = (traj.start(), traj.end());
    let n = model.samples_per_rev;
    let rate = model.sample_rate();
    let total = ((t1 - t0) * rate).floor() as usize + 1;

    let mut scan_rng = substream(rng, STREAM_SCAN);
    let mut records = Vec::with_capacity(total);
    for i in 0..total {
        let t = t0 + i as f64 / rate;
        let pose = traj.pose_at(t);
        let bearing = TAU * (i % n) as f64 / n as f64;
        let yaw = normalize_angle(pose.yaw + mount.yaw_offset);
        let scanner = ScannerPose::new(pose.x, pose.y, yaw).with_height(mount.height);
        let dir = beam_direction(bearing, scanner.yaw());
        let Some(hit) = raycast(scene, &scanner.center(), &dir)? else {
            continue;
        };
        if let Some(range) = apply_noise(model, hit.distance, &mut scan_rng) {
            records.push(ScanRecord {
                sample: ScanSample {
                    bearing,
                    range,
                    timestamp: t,
                    motor_step: 0.0,
                },
                motor_yaw: mount.yaw_offset,
            });
        }
    }

    let yaw_stream = |sigma: f64, rate: f64, index: u64| {
        let mut r = substream(rng, index);
        ticks(t0, t1, rate)
            .map(|t| {
                let z: f64 = r.sample(StandardNormal);
                GaussianScalarEstimate::new(wrap_pi(traj.pose_at(t).yaw + sigma * z), reported_variance(sigma), t)
            })
            .collect::<Vec<_>>()
    };
    let yaw_a = yaw_stream(noise.yaw_a_sigma, noise.yaw_a_rate, STREAM_YAW_A);
    let yaw_b = yaw_stream(noise.yaw_b_sigma, noise.yaw_b_rate, STREAM_YAW_B);

    let mut pos_rng = substream(rng, STREAM_POSITION);
    let positions = ticks(t0, t1, noise.position_rate)
        .map(|t| {
            let p = traj.pose_at(t);
            let (zx, zy): (f64, f64) = (pos_rng.sample(StandardNormal), pos_rng.sample(StandardNormal));
            PositionEstimate {
                x: p.x + noise.position_sigma * zx,
                y: p.y + noise.position_sigma * zy,
                timestamp: t,
            }
        })
        .collect();

    // Integrated rate gyro: the true increments plus a constant bias and a
    // random walk, so the error envelope keeps growing.
    let mut drift_rng = substream(rng, STREAM_DRIFT);
    let dt = 1.0 / noise.drift_sample_rate;
    let mut walk = 0.0;
    let mut drift = Vec::new();
    let mut truth = Vec::new();
    for (i, t) in ticks(t0, t1, noise.drift_sample_rate).enumerate() {
        let p = traj.pose_at(t);
        if i > 0 {
            let z: f64 = drift_rng.sample(StandardNormal);
            walk += noise.drift_walk * dt.sqrt() * z;
        }
        let elapsed = t - t0;
        let err = noise.drift_rate * elapsed + walk;
        let var = reported_variance(noise.drift_walk * elapsed.sqrt()) + (noise.drift_rate * elapsed).powi(2);
        drift.push(GaussianScalarEstimate::new(wrap_pi(p.yaw + err), var, t));
        truth.push(p);
    }

    Ok(TrolleyRun {
        records,
        yaw_a,
        yaw_b,
        drift,
        positions,
        truth,
    })
}
