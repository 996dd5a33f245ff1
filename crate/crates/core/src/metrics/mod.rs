//! Map-comparison metrics over a pair of octrees sharing a global frame.
//!
//! Every metric is computed on the finest voxel grid inside a bounding box.
//! A pruned leaf counts once per voxel it covers. Voxels known in only one
//! map take part in the IoU unions; the log-odds error, the correlation and
//! the common-node statistics only look at voxels known in both maps.

mod joint;
mod report;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::octree::{count_voxels, BoundingBox, OccupancyOctree, VoxelCounts};

pub use joint::{check_compatible, summarize, CommonRegion, JointSummary};
use joint::{FREE, NO, OCC};
pub use report::{format_report, report_csv_header, report_csv_row};

/// Probabilities at or beyond these bounds select the one-sided terms of the
/// log-odds error; target probabilities are clamped into the same interval.
pub const P_LOW: f64 = 0.0001;
pub const P_HIGH: f64 = 0.9999;

/// Known-coverage share at or below which the weighted IoU ignores the
/// unknown component.
pub const COVERAGE_THRESHOLD: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RatioMode {
    /// Denominator is every voxel in the box.
    #[default]
    FullBox,
    /// Unknown voxels are ignored; denominator is `n_occ + n_free`.
    KnownOnly,
}

impl std::str::FromStr for RatioMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full_box" => Ok(RatioMode::FullBox),
            "known_only" => Ok(RatioMode::KnownOnly),
            other => Err(Error::param(format!("unknown ratio mode {other:?} (full_box, known_only)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRatios {
    pub r_occ: f64,
    pub r_free: f64,
    pub r_no: f64,
}

impl NodeRatios {
    pub fn from_counts(counts: &VoxelCounts, mode: RatioMode) -> Result<Self> {
        Self::from_array([counts.n_occ, counts.n_free, counts.n_no], mode)
    }

    fn from_array(c: [u64; 3], mode: RatioMode) -> Result<Self> {
        let (no, denom) = match mode {
            RatioMode::FullBox => (c[NO], c[OCC] + c[FREE] + c[NO]),
            RatioMode::KnownOnly => (0, c[OCC] + c[FREE]),
        };
        if denom == 0 {
            return Err(Error::UndefinedRatio(match mode {
                RatioMode::FullBox => "empty box".into(),
                RatioMode::KnownOnly => "no known voxels in the box".into(),
            }));
        }
        let d = denom as f64;
        Ok(NodeRatios {
            r_occ: c[OCC] as f64 / d,
            r_free: c[FREE] as f64 / d,
            r_no: no as f64 / d,
        })
    }

    pub fn known(&self) -> f64 {
        self.r_occ + self.r_free
    }
}

pub fn node_ratios(tree: &OccupancyOctree, bbox: &BoundingBox, mode: RatioMode) -> Result<NodeRatios> {
    NodeRatios::from_counts(&count_voxels(tree, bbox), mode)
}

/// Per-type IoU; `None` when neither map has a voxel of that type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IoUScores {
    pub iou_occ: Option<f64>,
    pub iou_free: Option<f64>,
    pub iou_no: Option<f64>,
}

impl IoUScores {
    pub fn from_summary(s: &JointSummary) -> Self {
        let (r, t) = (s.ref_counts(), s.tar_counts());
        let iou = |k: usize| {
            let inter = s.pair[k][k];
            let union = r[k] + t[k] - inter;
            (union > 0).then(|| inter as f64 / union as f64)
        };
        IoUScores {
            iou_occ: iou(OCC),
            iou_free: iou(FREE),
            iou_no: iou(NO),
        }
    }
}

pub fn iou_per_type(reference: &OccupancyOctree, target: &OccupancyOctree, bbox: &BoundingBox) -> Result<IoUScores> {
    Ok(IoUScores::from_summary(&summarize(reference, target, bbox)?))
}

/// Combines per-type IoUs with the reference map's full-box ratios.
pub fn weighted_score(ratios: &NodeRatios, iou: &IoUScores, literal: bool) -> Result<f64> {
    if iou.iou_occ.is_none() && iou.iou_free.is_none() && iou.iou_no.is_none() {
        return Err(Error::UndefinedScore("no voxel type present in either map".into()));
    }
    // An undefined component has an empty union, so its reference weight is 0.
    let term = |w: f64, v: Option<f64>| w * v.unwrap_or(0.0);
    let known = term(ratios.r_occ, iou.iou_occ) + term(ratios.r_free, iou.iou_free);
    if ratios.known() > COVERAGE_THRESHOLD {
        Ok(known + term(ratios.r_no, iou.iou_no))
    } else if literal {
        Ok(known)
    } else if ratios.known() > 0.0 {
        Ok(known / ratios.known())
    } else {
        Err(Error::UndefinedScore("reference map has no known voxels in the box".into()))
    }
}

pub fn weighted_iou(
    reference: &OccupancyOctree,
    target: &OccupancyOctree,
    bbox: &BoundingBox,
    literal: bool,
) -> Result<f64> {
    let s = summarize(reference, target, bbox)?;
    let ratios = NodeRatios::from_array(s.ref_counts(), RatioMode::FullBox)?;
    weighted_score(&ratios, &IoUScores::from_summary(&s), literal)
}

/// Per-voxel term of the log-odds error (natural logarithm).
pub fn log_odds_term(p_ref: f64, p_tar: f64) -> f64 {
    let pt = p_tar.clamp(P_LOW, P_HIGH);
    let occ = |pr: f64| (pr / pt).ln() * pr;
    let free = |pr: f64| ((1.0 - pr) / (1.0 - pt)).ln() * (1.0 - pr);
    if p_ref >= P_HIGH {
        occ(p_ref)
    } else if p_ref <= P_LOW {
        free(p_ref)
    } else {
        free(p_ref) + occ(p_ref)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogOddsError {
    pub total: f64,
    pub mean: f64,
    pub count: u64,
}

pub fn log_odds_from_common(common: &[CommonRegion]) -> Result<LogOddsError> {
    let count: u64 = common.iter().map(|c| c.count).sum();
    if count == 0 {
        return Err(Error::UndefinedScore("no voxels known in both maps".into()));
    }
    let total: f64 = common
        .iter()
        .map(|c| c.count as f64 * log_odds_term(c.p_ref, c.p_tar))
        .sum();
    Ok(LogOddsError {
        total,
        mean: total / count as f64,
        count,
    })
}

pub fn log_odds_error(
    reference: &OccupancyOctree,
    target: &OccupancyOctree,
    bbox: &BoundingBox,
) -> Result<LogOddsError> {
    log_odds_from_common(&summarize(reference, target, bbox)?.common)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub rho: f64,
    /// Fewer than two common voxels: the score is 1 by construction.
    pub degenerate: bool,
}

/// Normalized cross correlation around the shared mean probability, with
/// the absolute value taken per term in the numerator.
pub fn correlation_from_common(common: &[CommonRegion]) -> Result<Correlation> {
    let n: u64 = common.iter().map(|c| c.count).sum();
    if n == 0 {
        return Err(Error::UndefinedScore("no voxels known in both maps".into()));
    }
    let mean = common
        .iter()
        .map(|c| c.count as f64 * (c.p_ref + c.p_tar))
        .sum::<f64>()
        / (2.0 * n as f64);
    let (mut num, mut sr, mut st) = (0.0, 0.0, 0.0);
    for c in common {
        let w = c.count as f64;
        let (dr, dt) = (c.p_ref - mean, c.p_tar - mean);
        num += w * (dr * dt).abs();
        sr += w * dr * dr;
        st += w * dt * dt;
    }
    let denom = (sr * st).sqrt();
    if denom == 0.0 {
        return Err(Error::DegenerateCorrelation);
    }
    Ok(Correlation {
        rho: num / denom,
        degenerate: n < 2,
    })
}

pub fn correlation(reference: &OccupancyOctree, target: &OccupancyOctree, bbox: &BoundingBox) -> Result<Correlation> {
    correlation_from_common(&summarize(reference, target, bbox)?.common)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonNodeStats {
    pub mean_common_probability: f64,
    pub mean_probability_deviation: f64,
    pub common_node_count: u64,
}

pub fn common_stats_from_common(common: &[CommonRegion]) -> Result<CommonNodeStats> {
    let n: u64 = common.iter().map(|c| c.count).sum();
    if n == 0 {
        return Err(Error::UndefinedScore("no voxels known in both maps".into()));
    }
    let (mut mean, mut dev) = (0.0, 0.0);
    for c in common {
        let w = c.count as f64;
        mean += w * (c.p_ref + c.p_tar) / 2.0;
        dev += w * (c.p_ref - c.p_tar).abs();
    }
    Ok(CommonNodeStats {
        mean_common_probability: mean / n as f64,
        mean_probability_deviation: dev / n as f64,
        common_node_count: n,
    })
}

pub fn common_node_stats(
    reference: &OccupancyOctree,
    target: &OccupancyOctree,
    bbox: &BoundingBox,
) -> Result<CommonNodeStats> {
    common_stats_from_common(&summarize(reference, target, bbox)?.common)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricConfig {
    /// Apply the low-coverage branch of the weighted IoU without
    /// renormalization.
    pub literal_weighting: bool,
}

/// All metrics for one map pair. Undefined components are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub resolution: f64,
    pub bbox: BoundingBox,
    pub total_voxels: u64,
    pub ref_ratios: Option<NodeRatios>,
    pub tar_ratios: Option<NodeRatios>,
    pub ref_known_ratios: Option<NodeRatios>,
    pub tar_known_ratios: Option<NodeRatios>,
    pub iou: IoUScores,
    pub weighted_iou: Option<f64>,
    pub literal_weighting: bool,
    pub log_odds: Option<LogOddsError>,
    pub correlation: Option<Correlation>,
    pub common: Option<CommonNodeStats>,
    pub ref_leaf_count: usize,
    pub tar_leaf_count: usize,
    pub evaluation_time_ms: f64,
}

/// Runs every metric off a single joint traversal.
pub fn full_report(
    reference: &OccupancyOctree,
    target: &OccupancyOctree,
    bbox: &BoundingBox,
    config: &MetricConfig,
) -> Result<MetricReport> {
    let start = Instant::now();
    let s = summarize(reference, target, bbox)?;
    let ref_ratios = NodeRatios::from_array(s.ref_counts(), RatioMode::FullBox).ok();
    let tar_ratios = NodeRatios::from_array(s.tar_counts(), RatioMode::FullBox).ok();
    let iou = IoUScores::from_summary(&s);
    let weighted_iou = ref_ratios.and_then(|r| weighted_score(&r, &iou, config.literal_weighting).ok());
    let log_odds = log_odds_from_common(&s.common).ok();
    let correlation = correlation_from_common(&s.common).ok();
    let common = common_stats_from_common(&s.common).ok();
    let evaluation_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(MetricReport {
        resolution: reference.resolution(),
        bbox: *bbox,
        total_voxels: s.total,
        ref_ratios,
        tar_ratios,
        ref_known_ratios: NodeRatios::from_array(s.ref_counts(), RatioMode::KnownOnly).ok(),
        tar_known_ratios: NodeRatios::from_array(s.tar_counts(), RatioMode::KnownOnly).ok(),
        iou,
        weighted_iou,
        literal_weighting: config.literal_weighting,
        log_odds,
        correlation,
        common,
        ref_leaf_count: reference.leaf_count(),
        tar_leaf_count: target.leaf_count(),
        evaluation_time_ms,
    })
}

/// Union of the known extents of both maps, used when no box is given.
pub fn default_box(reference: &OccupancyOctree, target: &OccupancyOctree) -> Result<BoundingBox> {
    match (reference.known_bounds(), target.known_bounds()) {
        (Some(a), Some(b)) => Ok(a.union(&b)),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (None, None) => Err(Error::UndefinedScore("both maps are empty".into())),
    }
}
