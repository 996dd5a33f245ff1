//! Point clouds from scan logs: fixed stations or a moving trolley.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::scanlog::{read_estimates, read_positions, read_scan_log, PositionEstimate, ScanRecord, TrolleyPose};
use crate::geometry::{
    angle_diff, ci_fuse, match_streams, select_omega, transform_scan_sample, wrap_pi, GaussianScalarEstimate,
    ScannerPose,
};
use crate::pointcloud::PointCloud;
use crate::simulator::session::{SessionManifest, SessionMode};

/// Applies the scan transform to every record of one station. The motor
/// yaw of each record is the yaw at the start of its revolution.
pub fn build_static(records: &[ScanRecord], x: f64, y: f64, height: f64) -> Result<PointCloud> {
    let mut points = Vec::with_capacity(records.len());
    let mut origins = Vec::with_capacity(records.len());
    for r in records {
        let pose = ScannerPose::new(x, y, r.motor_yaw).with_height(height);
        points.push(transform_scan_sample(&pose, &r.sample)?);
        origins.push(pose.center());
    }
    PointCloud::with_origins(points, origins)
}

/// Pairs every primary estimate with the nearest secondary one and fuses
/// each pair by covariance intersection. Returns the fused stream and the
/// number of primary estimates left without a partner.
pub fn fuse_yaw_streams(
    primary: &[GaussianScalarEstimate],
    secondary: &[GaussianScalarEstimate],
    max_skew: f64,
) -> Result<(Vec<GaussianScalarEstimate>, usize)> {
    let pairs = match_streams(primary, secondary, max_skew)?;
    let fused = pairs
        .iter()
        .map(|&(i, j)| {
            let (a, b) = (&primary[i], &secondary[j]);
            ci_fuse(a, b, select_omega(a.variance, b.variance)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((fused, primary.len() - pairs.len()))
}

/// Pairs every position with the nearest yaw estimate. Poses carry the
/// position timestamps. Also returns the number of positions left without
/// a yaw.
pub fn compose_poses(
    yaws: &[GaussianScalarEstimate],
    positions: &[PositionEstimate],
    max_skew: f64,
) -> Result<(Vec<TrolleyPose>, usize)> {
    let pairs = match_streams(positions, yaws, max_skew)?;
    let poses = pairs
        .iter()
        .map(|&(i, j)| TrolleyPose {
            x: positions[i].x,
            y: positions[i].y,
            yaw: yaws[j].mean,
            timestamp: positions[i].timestamp,
        })
        .collect();
    Ok((poses, positions.len() - pairs.len()))
}

/// Pose at `t` by linear interpolation between the bracketing poses. `None`
/// outside the pose span or across a gap wider than `max_gap`.
pub fn interpolate_pose(poses: &[TrolleyPose], t: f64, max_gap: f64) -> Option<TrolleyPose> {
    let i = poses.partition_point(|p| p.timestamp < t);
    if i < poses.len() && poses[i].timestamp == t {
        return Some(poses[i]);
    }
    if i == 0 || i == poses.len() {
        return None;
    }
    let (a, b) = (poses[i - 1], poses[i]);
    if b.timestamp - a.timestamp > max_gap {
        return None;
    }
    let s = (t - a.timestamp) / (b.timestamp - a.timestamp);
    Some(TrolleyPose {
        x: a.x + s * (b.x - a.x),
        y: a.y + s * (b.y - a.y),
        yaw: wrap_pi(a.yaw + s * angle_diff(b.yaw, a.yaw)),
        timestamp: t,
    })
}

/// Cloud from a moving platform. Each sample is placed with the pose
/// interpolated at its timestamp plus the record's mount yaw. Returns the
/// cloud and the number of samples skipped for lack of a pose.
pub fn build_from_poses(
    records: &[ScanRecord],
    poses: &[TrolleyPose],
    height: f64,
    max_gap: f64,
) -> Result<(PointCloud, usize)> {
    if poses.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
        return Err(Error::domain("pose stream is not sorted by timestamp"));
    }
    let mut points = Vec::with_capacity(records.len());
    let mut origins = Vec::with_capacity(records.len());
    let mut skipped = 0;
    for r in records {
        let Some(p) = interpolate_pose(poses, r.sample.timestamp, max_gap) else {
            skipped += 1;
            continue;
        };
        let pose = ScannerPose::new(p.x, p.y, p.yaw + r.motor_yaw).with_height(height);
        points.push(transform_scan_sample(&pose, &r.sample)?);
        origins.push(pose.center());
    }
    Ok((PointCloud::with_origins(points, origins)?, skipped))
}

/// Cloud plus bookkeeping for the summary printed by the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildOutput {
    pub cloud: PointCloud,
    pub samples: usize,
    /// Stream estimates without a partner within the skew limit.
    pub unmatched: usize,
    /// Scan samples dropped because no pose covered them.
    pub skipped: usize,
}

impl BuildOutput {
    pub fn warnings(&self) -> usize {
        self.unmatched + self.skipped
    }
}

/// Which yaw source drives a trolley build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YawSource {
    /// Stream B fused with stream A.
    #[default]
    Fused,
    StreamA,
    StreamB,
    Drift,
    Truth,
}

impl std::str::FromStr for YawSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fused" => YawSource::Fused,
            "a" | "yaw_a" => YawSource::StreamA,
            "b" | "yaw_b" => YawSource::StreamB,
            "drift" => YawSource::Drift,
            "truth" => YawSource::Truth,
            other => return Err(Error::param(format!("unknown yaw source {other:?}"))),
        })
    }
}

/// Rebuilds the cloud of a simulated session directory.
pub fn build_session(dir: &Path, source: YawSource) -> Result<BuildOutput> {
    let m = SessionManifest::read(dir)?;
    let out = match m.mode {
        SessionMode::Static => {
            let mut cloud = PointCloud::default();
            let mut samples = 0;
            for st in &m.stations {
                let records = read_scan_log(&dir.join(&st.log))?;
                samples += records.len();
                cloud.extend(build_static(&records, st.x, st.y, m.height)?);
            }
            BuildOutput {
                cloud,
                samples,
                unmatched: 0,
                skipped: 0,
            }
        }
        SessionMode::Trolley => {
            let files = m
                .trolley
                .as_ref()
                .ok_or_else(|| Error::param("trolley session without stream files"))?;
            let records = read_scan_log(&dir.join(&files.scan_log))?;
            let (poses, unmatched) = if source == YawSource::Truth {
                let poses = crate::geometry::scanlog::read_poses(&dir.join(&files.truth))?;
                (poses, 0)
            } else {
                let positions = read_positions(&dir.join(&files.positions))?;
                let (yaws, unmatched_yaw) = match source {
                    YawSource::Fused => {
                        let a = read_estimates(&dir.join(&files.yaw_a))?;
                        let b = read_estimates(&dir.join(&files.yaw_b))?;
                        fuse_yaw_streams(&b, &a, m.max_skew)?
                    }
                    YawSource::StreamA => (read_estimates(&dir.join(&files.yaw_a))?, 0),
                    YawSource::StreamB => (read_estimates(&dir.join(&files.yaw_b))?, 0),
                    _ => (read_estimates(&dir.join(&files.drift))?, 0),
                };
                let (poses, unmatched_pos) = compose_poses(&yaws, &positions, m.max_skew)?;
                (poses, unmatched_yaw + unmatched_pos)
            };
            let (cloud, skipped) = build_from_poses(&records, &poses, m.height, m.max_gap)?;
            BuildOutput {
                cloud,
                samples: records.len(),
                unmatched,
                skipped,
            }
        }
    };
    if out.cloud.is_empty() {
        return Err(Error::domain("empty cloud: no sample could be reconstructed"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ScanSample;

    fn est(mean: f64, var: f64, t: f64) -> GaussianScalarEstimate {
        GaussianScalarEstimate::new(mean, var, t)
    }

    #[test]
    fn static_records_use_their_motor_yaw() {
        let r = ScanRecord {
            sample: ScanSample { bearing: std::f64::consts::FRAC_PI_2, range: 2.0, timestamp: 0.0, motor_step: 0.1 },
            motor_yaw: 0.0,
        };
        let c = build_static(&[r], 1.0, 2.0, 0.5).unwrap();
        let p = c.points[0];
        assert!((p.x - 1.0).abs() < 1e-12 && (p.y - 4.0).abs() < 1e-12 && (p.z - 0.5).abs() < 1e-12);
        assert_eq!(c.sensor_origins.unwrap()[0], crate::Point3::new(1.0, 2.0, 0.5));
    }

    #[test]
    fn fusion_pairs_and_counts_gaps() {
        let b = [est(0.10, 0.0009, 0.0), est(0.20, 0.0009, 0.1), est(0.30, 0.0009, 5.0)];
        let a = [est(0.12, 0.0016, 0.0), est(0.18, 0.0016, 0.1)];
        let (fused, unmatched) = fuse_yaw_streams(&b, &a, 0.05).unwrap();
        assert_eq!((fused.len(), unmatched), (2, 1));
        let want = ci_fuse(&b[0], &a[0], select_omega(0.0009, 0.0016).unwrap()).unwrap();
        assert_eq!(fused[0], want);
        assert!(fused[0].variance > 0.0009 && fused[0].variance < 0.0016);
    }

    #[test]
    fn pose_interpolation() {
        let poses = [
            TrolleyPose { x: 0.0, y: 0.0, yaw: 3.0, timestamp: 0.0 },
            TrolleyPose { x: 1.0, y: 2.0, yaw: -3.0, timestamp: 1.0 },
            TrolleyPose { x: 1.0, y: 2.0, yaw: -3.0, timestamp: 5.0 },
        ];
        let p = interpolate_pose(&poses, 0.5, 0.5 + 0.6).unwrap();
        assert!((p.x - 0.5).abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
        assert!((p.yaw.abs() - std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(interpolate_pose(&poses, 1.0, 0.1).unwrap().x, 1.0);
        assert!(interpolate_pose(&poses, 3.0, 1.0).is_none());
        assert!(interpolate_pose(&poses, -0.1, 1.0).is_none());
        assert!(interpolate_pose(&poses, 5.1, 1.0).is_none());
    }
}
