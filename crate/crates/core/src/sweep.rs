//! Resolution sweep: conversion cost, map size and self-evaluation cost.

use std::fmt::Write as _;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::metrics::{default_box, full_report, MetricConfig};
use crate::octree::{count_voxels, OccupancyOctree, OccupancyParams};
use crate::pointcloud::PointCloud;
use crate::Point3;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub resolution: f64,
    /// Median over the trials.
    pub conversion_ms: f64,
    /// `n_occ · resolution³`, cubic meters.
    pub occupied_volume: f64,
    pub leaf_count: usize,
    /// Median time of the full metric suite on the map against itself.
    pub evaluation_ms: f64,
    pub self_weighted_iou: Option<f64>,
    pub self_log_odds: Option<f64>,
    pub self_rho: Option<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Converts `cloud` at every resolution `trials` times and self-compares the
/// result. Rows come out in the order of `resolutions`.
pub fn sweep_resolution(
    cloud: &PointCloud,
    resolutions: &[f64],
    trials: usize,
    params: &OccupancyParams,
    fallback_origin: Option<Point3>,
) -> Result<Vec<SweepRow>> {
    if resolutions.is_empty() || trials == 0 {
        return Err(Error::param("sweep needs at least one resolution and one trial"));
    }
    let mut rows = Vec::with_capacity(resolutions.len());
    for &res in resolutions {
        let mut conv = Vec::with_capacity(trials);
        let mut eval = Vec::with_capacity(trials);
        let mut last = None;
        for _ in 0..trials {
            let start = Instant::now();
            let tree = OccupancyOctree::from_pointcloud(cloud, res, params, fallback_origin)?;
            conv.push(start.elapsed().as_secs_f64() * 1e3);
            let report = match default_box(&tree, &tree) {
                Ok(bbox) => {
                    let start = Instant::now();
                    let r = full_report(&tree, &tree, &bbox, &MetricConfig::default())?;
                    eval.push(start.elapsed().as_secs_f64() * 1e3);
                    Some((r, bbox))
                }
                Err(_) => {
                    eval.push(0.0);
                    None
                }
            };
            last = Some((tree, report));
        }
        let (tree, report) = last.expect("at least one trial");
        let n_occ = report.as_ref().map_or(0, |(_, b)| count_voxels(&tree, b).n_occ);
        let r = report.map(|(r, _)| r);
        rows.push(SweepRow {
            resolution: res,
            conversion_ms: median(conv),
            occupied_volume: n_occ as f64 * res.powi(3),
            leaf_count: tree.leaf_count(),
            evaluation_ms: median(eval),
            self_weighted_iou: r.as_ref().and_then(|r| r.weighted_iou),
            self_log_odds: r.as_ref().and_then(|r| r.log_odds.map(|l| l.total)),
            self_rho: r.as_ref().and_then(|r| r.correlation.map(|c| c.rho)),
        });
    }
    Ok(rows)
}

pub fn format_sweep(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "resolution,conversion_ms,occupied_volume_m3,leaf_count,evaluation_ms,self_weighted_iou,self_log_odds,self_rho\n",
    );
    let opt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), sig9);
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            sig9(r.resolution),
            sig9(r.conversion_ms),
            sig9(r.occupied_volume),
            r.leaf_count,
            sig9(r.evaluation_ms),
            opt(r.self_weighted_iou),
            opt(r.self_log_odds),
            opt(r.self_rho),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> PointCloud {
        let pts: Vec<Point3> = (0..400)
            .map(|i| {
                let a = i as f64 * std::f64::consts::TAU / 400.0;
                Point3::new(2.0 * a.cos(), 2.0 * a.sin(), 0.5 + 0.3 * (3.0 * a).sin())
            })
            .collect();
        PointCloud::new(pts)
    }

    #[test]
    fn rows_follow_resolutions_and_self_scores_are_ideal() {
        let rows = sweep_resolution(&ring(), &[0.4, 0.2, 0.1], 3, &OccupancyParams::default(), Some(Point3::ORIGIN)).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert_eq!(r.self_weighted_iou, Some(1.0));
            assert_eq!(r.self_log_odds, Some(0.0));
            assert!((r.self_rho.unwrap() - 1.0).abs() < 1e-12);
            assert!(r.occupied_volume > 0.0);
        }
        assert!(rows[2].leaf_count > rows[0].leaf_count);
        let text = format_sweep(&rows);
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn single_resolution_gives_one_row() {
        let rows = sweep_resolution(&ring(), &[0.25], 1, &OccupancyParams::default(), Some(Point3::ORIGIN)).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(sweep_resolution(&ring(), &[], 1, &OccupancyParams::default(), None).is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
