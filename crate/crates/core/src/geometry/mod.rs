//! Scan geometry: poses, the scan-sample transform, motor yaw bookkeeping,
//! yaw fusion and timestamp matching.

mod fusion;
pub mod scanlog;
mod sync;

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

pub use fusion::{ci_fuse, select_omega, GaussianScalarEstimate};
pub use sync::{match_streams, Timestamped};

/// A point or vector in the global frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, other: &Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        (*self - *other).norm()
    }

    pub fn axis(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::param(format!("unknown axis {other:?}"))),
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

/// Maps an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Maps an angle into `(-π, π]`.
pub fn wrap_pi(a: f64) -> f64 {
    let r = normalize_angle(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Shortest signed angular distance from `from` to `to`.
pub fn angle_diff(to: f64, from: f64) -> f64 {
    wrap_pi(to - from)
}

/// Position of the scanner on the ground plus the accumulated external
/// motor yaw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScannerPose {
    pub x: f64,
    pub y: f64,
    /// Accumulated motor yaw, kept in `[0, 2π)`.
    yaw: f64,
    /// Height of the scan center above the ground.
    pub z_offset: f64,
}

impl ScannerPose {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        ScannerPose {
            x,
            y,
            yaw: normalize_angle(yaw),
            z_offset: 0.0,
        }
    }

    pub fn with_height(mut self, z_offset: f64) -> Self {
        self.z_offset = z_offset;
        self
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    /// Scan center in the global frame.
    pub fn center(&self) -> Point3 {
        Point3::new(self.x, self.y, self.z_offset)
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.yaw.is_finite() && self.z_offset.is_finite()
    }
}

/// Rotates the device by a motor step. The position is unchanged.
pub fn advance_motor_yaw(pose: ScannerPose, dphi: f64) -> ScannerPose {
    ScannerPose {
        yaw: normalize_angle(pose.yaw + dphi),
        ..pose
    }
}

/// One lidar return in the scanner's local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSample {
    /// Beam angle in the scan plane, `[0, 2π)`; 0 points straight up.
    pub bearing: f64,
    pub range: f64,
    pub timestamp: f64,
    /// Motor step that has been applied by the time the beam sweeps the
    /// second half of the revolution.
    pub motor_step: f64,
}

impl ScanSample {
    fn check(&self) -> Result<()> {
        if !(self.bearing.is_finite()
            && self.range.is_finite()
            && self.timestamp.is_finite()
            && self.motor_step.is_finite())
        {
            return Err(Error::domain("non-finite scan sample"));
        }
        if !(0.0..TAU).contains(&self.bearing) {
            return Err(Error::domain(format!("bearing {} outside [0, 2π)", self.bearing)));
        }
        if self.range <= 0.0 {
            return Err(Error::domain(format!("non-positive range {}", self.range)));
        }
        Ok(())
    }

    /// Yaw the beam is actually measured at. Bearings in `[0, π]` use the
    /// current yaw, bearings in `(π, 2π)` the stepped yaw.
    pub fn effective_yaw(&self, pose_yaw: f64) -> f64 {
        if self.bearing <= PI {
            pose_yaw
        } else {
            pose_yaw + self.motor_step
        }
    }
}

/// Beam direction for a bearing and an effective yaw. `L` times this vector
/// is the offset of the return from the scan center.
pub fn beam_direction(bearing: f64, yaw: f64) -> Point3 {
    let (sin_t, cos_t) = bearing.sin_cos();
    let (sin_y, cos_y) = yaw.sin_cos();
    Point3::new(-sin_t * sin_y, sin_t * cos_y, cos_t)
}

/// Transforms a range/bearing sample taken at `pose` into the global frame.
pub fn transform_scan_sample(pose: &ScannerPose, sample: &ScanSample) -> Result<Point3> {
    if !pose.is_finite() {
        return Err(Error::domain("non-finite scanner pose"));
    }
    sample.check()?;
    let dir = beam_direction(sample.bearing, sample.effective_yaw(pose.yaw));
    Ok(pose.center() + dir * sample.range)
}
