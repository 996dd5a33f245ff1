//! Text renderings of a [`MetricReport`].

use std::fmt::Write;

use super::{MetricReport, NodeRatios, RatioMode, COVERAGE_THRESHOLD};
use crate::fmt::sig9;

const UNDEFINED: &str = "undefined";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), sig9)
}

fn point(p: &crate::Point3) -> String {
    format!("{} {} {}", sig9(p.x), sig9(p.y), sig9(p.z))
}

fn ratio_lines(out: &mut String, prefix: &str, r: Option<NodeRatios>) {
    let _ = writeln!(out, "{prefix}_r_occ: {}", opt(r.map(|r| r.r_occ)));
    let _ = writeln!(out, "{prefix}_r_free: {}", opt(r.map(|r| r.r_free)));
    let _ = writeln!(out, "{prefix}_r_no: {}", opt(r.map(|r| r.r_no)));
}

/// `key: value` lines, one metric per line, floats to 9 significant digits.
pub fn format_report(r: &MetricReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "resolution: {}", sig9(r.resolution));
    let _ = writeln!(out, "box_min: {}", point(&r.bbox.min));
    let _ = writeln!(out, "box_max: {}", point(&r.bbox.max));
    let _ = writeln!(out, "total_voxels: {}", r.total_voxels);
    ratio_lines(&mut out, "ref", r.ref_ratios);
    ratio_lines(&mut out, "tar", r.tar_ratios);
    ratio_lines(&mut out, "ref_known", r.ref_known_ratios);
    ratio_lines(&mut out, "tar_known", r.tar_known_ratios);
    let _ = writeln!(out, "iou_occ: {}", opt(r.iou.iou_occ));
    let _ = writeln!(out, "iou_free: {}", opt(r.iou.iou_free));
    let _ = writeln!(out, "iou_no: {}", opt(r.iou.iou_no));
    let _ = writeln!(out, "weighted_iou: {}", opt(r.weighted_iou));
    // Which branch produced the weighted score.
    let mode = match r.ref_ratios {
        Some(q) if q.known() > COVERAGE_THRESHOLD => "all_types",
        _ if r.literal_weighting => "known_literal",
        _ => "known_renormalized",
    };
    let _ = writeln!(out, "weighting: {mode}");
    let _ = writeln!(out, "log_odds_total: {}", opt(r.log_odds.map(|l| l.total)));
    let _ = writeln!(out, "log_odds_mean: {}", opt(r.log_odds.map(|l| l.mean)));
    let _ = writeln!(out, "rho: {}", opt(r.correlation.map(|c| c.rho)));
    let _ = writeln!(
        out,
        "rho_degenerate: {}",
        r.correlation.map_or(UNDEFINED.to_string(), |c| c.degenerate.to_string())
    );
    let _ = writeln!(out, "rho_numerator: absolute value per voxel");
    let _ = writeln!(
        out,
        "mean_common_probability: {}",
        opt(r.common.map(|c| c.mean_common_probability))
    );
    let _ = writeln!(
        out,
        "mean_probability_deviation: {}",
        opt(r.common.map(|c| c.mean_probability_deviation))
    );
    let _ = writeln!(out, "common_node_count: {}", r.common.map_or(0, |c| c.common_node_count));
    let _ = writeln!(out, "ref_leaf_count: {}", r.ref_leaf_count);
    let _ = writeln!(out, "tar_leaf_count: {}", r.tar_leaf_count);
    let _ = writeln!(out, "evaluation_time_ms: {}", sig9(r.evaluation_time_ms));
    out
}

pub fn report_csv_header() -> &'static str {
    "label,resolution,ratio_mode,ref_r_occ,ref_r_free,ref_r_no,tar_r_occ,tar_r_free,tar_r_no,iou_occ,iou_free,iou_no,weighted_iou,log_odds_total,log_odds_mean,rho,\
mean_common_probability,mean_probability_deviation,common_node_count,ref_leaf_count,tar_leaf_count,evaluation_time_ms"
}

/// One table row; `mode` picks which ratio set fills the ratio columns.
pub fn report_csv_row(label: &str, r: &MetricReport, mode: RatioMode) -> String {
    let (rr, tr, name) = match mode {
        RatioMode::FullBox => (r.ref_ratios, r.tar_ratios, "full_box"),
        RatioMode::KnownOnly => (r.ref_known_ratios, r.tar_known_ratios, "known_only"),
    };
    [
        label.to_string(),
        sig9(r.resolution),
        name.to_string(),
        opt(rr.map(|x| x.r_occ)),
        opt(rr.map(|x| x.r_free)),
        opt(rr.map(|x| x.r_no)),
        opt(tr.map(|x| x.r_occ)),
        opt(tr.map(|x| x.r_free)),
        opt(tr.map(|x| x.r_no)),
        opt(r.iou.iou_occ),
        opt(r.iou.iou_free),
        opt(r.iou.iou_no),
        opt(r.weighted_iou),
        opt(r.log_odds.map(|l| l.total)),
        opt(r.log_odds.map(|l| l.mean)),
        opt(r.correlation.map(|c| c.rho)),
        opt(r.common.map(|c| c.mean_common_probability)),
        opt(r.common.map(|c| c.mean_probability_deviation)),
        r.common.map_or(0, |c| c.common_node_count).to_string(),
        r.ref_leaf_count.to_string(),
        r.tar_leaf_count.to_string(),
        sig9(r.evaluation_time_ms),
    ]
    .join(",")
}
