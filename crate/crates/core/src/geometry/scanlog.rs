//! Line-oriented text formats for scan logs and estimate streams.
//!
//! Every format is whitespace-separated decimal columns, one record per
//! line. Blank lines and anything after `#` are ignored.
//!
//! | file            | columns                                                   |
//! |-----------------|-----------------------------------------------------------|
//! | scan log        | `timestamp bearing_rad range_m motor_yaw_rad motor_step_rad` |
//! | estimate stream | `timestamp mean_rad variance`                             |
//! | position stream | `timestamp x y`                                           |
//! | pose stream     | `timestamp x y yaw`                                       |
//!
//! Writers emit the shortest decimal that round-trips each `f64`.

use std::fmt::Write as _;
use std::path::Path;

use super::{GaussianScalarEstimate, ScanSample, Timestamped};
use crate::error::{Error, Result};

/// A scan sample together with the motor yaw at the start of its
/// revolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRecord {
    pub sample: ScanSample,
    pub motor_yaw: f64,
}

impl Timestamped for ScanRecord {
    fn timestamp(&self) -> f64 {
        self.sample.timestamp
    }
}

/// Planar pose of the moving platform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrolleyPose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub timestamp: f64,
}

impl Timestamped for TrolleyPose {
    fn timestamp(&self) -> f64 {
        self.timestamp
    }
}

/// Position-only estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionEstimate {
    pub x: f64,
    pub y: f64,
    pub timestamp: f64,
}

impl Timestamped for PositionEstimate {
    fn timestamp(&self) -> f64 {
        self.timestamp
    }
}

/// Splits `text` into numeric rows of exactly `ncols` columns.
pub fn parse_columns(text: &str, name: &str, ncols: usize) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: name.to_string(),
            line: idx + 1,
            msg,
        };
        let vals = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("bad number {tok:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != ncols {
            return Err(err(format!("expected {ncols} columns, found {}", vals.len())));
        }
        rows.push((idx + 1, vals));
    }
    Ok(rows)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn parse_scan_log(text: &str, name: &str) -> Result<Vec<ScanRecord>> {
    parse_columns(text, name, 5)?
        .into_iter()
        .map(|(line, v)| {
            let record = ScanRecord {
                sample: ScanSample {
                    timestamp: v[0],
                    bearing: v[1],
                    range: v[2],
                    motor_step: v[4],
                },
                motor_yaw: v[3],
            };
            if !(0.0..std::f64::consts::TAU).contains(&v[1]) || v[2] <= 0.0 || v[4] < 0.0 {
                return Err(Error::Parse {
                    path: name.to_string(),
                    line,
                    msg: "bearing must be in [0, 2π), range > 0, motor step >= 0".into(),
                });
            }
            Ok(record)
        })
        .collect()
}

pub fn read_scan_log(path: &Path) -> Result<Vec<ScanRecord>> {
    parse_scan_log(&read_text(path)?, &path.display().to_string())
}

pub fn format_scan_log(records: &[ScanRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 64);
    for r in records {
        let s = &r.sample;
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            s.timestamp, s.bearing, s.range, r.motor_yaw, s.motor_step
        );
    }
    out
}

pub fn parse_estimates(text: &str, name: &str) -> Result<Vec<GaussianScalarEstimate>> {
    parse_columns(text, name, 3)?
        .into_iter()
        .map(|(line, v)| {
            if v[2] <= 0.0 {
                return Err(Error::Parse {
                    path: name.to_string(),
                    line,
                    msg: format!("non-positive variance {}", v[2]),
                });
            }
            Ok(GaussianScalarEstimate::new(v[1], v[2], v[0]))
        })
        .collect()
}

pub fn read_estimates(path: &Path) -> Result<Vec<GaussianScalarEstimate>> {
    parse_estimates(&read_text(path)?, &path.display().to_string())
}

pub fn format_estimates(items: &[GaussianScalarEstimate]) -> String {
    let mut out = String::new();
    for e in items {
        let _ = writeln!(out, "{} {} {}", e.timestamp, e.mean, e.variance);
    }
    out
}

pub fn parse_positions(text: &str, name: &str) -> Result<Vec<PositionEstimate>> {
    Ok(parse_columns(text, name, 3)?
        .into_iter()
        .map(|(_, v)| PositionEstimate {
            timestamp: v[0],
            x: v[1],
            y: v[2],
        })
        .collect())
}

pub fn read_positions(path: &Path) -> Result<Vec<PositionEstimate>> {
    parse_positions(&read_text(path)?, &path.display().to_string())
}

pub fn format_positions(items: &[PositionEstimate]) -> String {
    let mut out = String::new();
    for p in items {
        let _ = writeln!(out, "{} {} {}", p.timestamp, p.x, p.y);
    }
    out
}

pub fn parse_poses(text: &str, name: &str) -> Result<Vec<TrolleyPose>> {
    Ok(parse_columns(text, name, 4)?
        .into_iter()
        .map(|(_, v)| TrolleyPose {
            timestamp: v[0],
            x: v[1],
            y: v[2],
            yaw: v[3],
        })
        .collect())
}

pub fn read_poses(path: &Path) -> Result<Vec<TrolleyPose>> {
    parse_poses(&read_text(path)?, &path.display().to_string())
}

pub fn format_poses(items: &[TrolleyPose]) -> String {
    let mut out = String::new();
    for p in items {
        let _ = writeln!(out, "{} {} {} {}", p.timestamp, p.x, p.y, p.yaw);
    }
    out
}
