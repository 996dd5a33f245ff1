//! Acceptance checks. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero on failure.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::time::Instant;

use lidarmap::geometry::{angle_diff, transform_scan_sample, GaussianScalarEstimate, ScanSample, ScannerPose};
use lidarmap::metrics::{default_box, full_report, MetricConfig, MetricReport};
use lidarmap::octree::{logit, Occupancy, OccupancyOctree, OccupancyParams, VoxelRange};
use lidarmap::pointcloud::PointCloud;
use lidarmap::reconstruct::{build_static, fuse_yaw_streams};
use lidarmap::simulator::{
    apply_noise, ground_truth_octree, parse_scene, simulate_static_scan, simulate_trolley_run, Mount, Scene,
    SensorModel, StreamNoise, TrajectorySpec, Waypoint,
};
use lidarmap::sweep::sweep_resolution;
use lidarmap::Point3;
use nalgebra::{Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit_s: f64,
    check: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Meeting-room stand-in: walls, a table and a cabinet.
const ROOM: &str = "box 0 0 1.5 10 8 3\nbox 1.5 1.0 0.4 2.0 1.0 0.8\nbox -4.0 3.0 1.0 1.2 1.2 2.0\n";

fn room() -> Scene {
    parse_scene(ROOM, "room").unwrap()
}

/// Distance to the nearest face of the room boxes, written out by hand.
fn room_distance(p: &Point3) -> f64 {
    let boxes = [
        ([-5.0, -4.0, 0.0], [5.0, 4.0, 3.0]),
        ([0.5, 0.5, 0.0], [2.5, 1.5, 0.8]),
        ([-4.6, 2.4, 0.0], [-3.4, 3.6, 2.0]),
    ];
    let p = p.to_array();
    boxes
        .iter()
        .map(|(lo, hi)| {
            let inside = (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a]);
            if inside {
                (0..3).map(|a| (p[a] - lo[a]).min(hi[a] - p[a])).fold(f64::INFINITY, f64::min)
            } else {
                (0..3)
                    .map(|a| (lo[a] - p[a]).max(p[a] - hi[a]).max(0.0).powi(2))
                    .sum::<f64>()
                    .sqrt()
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Static scans of the room at the given stations, `steps` motor steps per
/// full turn and half a turn per station.
fn scanned_cloud(stations: &[(f64, f64)], seed: u64, steps: usize, model: &SensorModel) -> PointCloud {
    let scene = room();
    let mut cloud = PointCloud::default();
    for (i, &(x, y)) in stations.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + i as u64);
        let pose = ScannerPose::new(x, y, 0.0).with_height(1.2);
        let scan = simulate_static_scan(&scene, pose, model, TAU / steps as f64, steps / 2, &mut rng).unwrap();
        cloud.extend(build_static(&scan.records, x, y, 1.2).unwrap());
    }
    cloud
}

fn sweep_model(freq: f64) -> SensorModel {
    SensorModel::preset("sweep_like", Some(freq)).unwrap()
}

fn map_from(cloud: &PointCloud, res: f64) -> OccupancyOctree {
    OccupancyOctree::from_pointcloud(cloud, res, &OccupancyParams::default(), None).unwrap()
}

/// Random map over keys in `[-half, half)^3`, built from voxel updates and
/// rays, pruned half of the time.
fn random_map(rng: &mut ChaCha8Rng, res: f64, half: i64, updates: usize) -> OccupancyOctree {
    let mut t = OccupancyOctree::new(res, &OccupancyParams::default()).unwrap();
    let m = *t.model();
    let coord = |rng: &mut ChaCha8Rng| rng.random_range(-(half as f64)..half as f64) * res;
    for _ in 0..updates {
        let key = [rng.random_range(-half..half), rng.random_range(-half..half), rng.random_range(-half..half)];
        match rng.random_range(0..4) {
            0 => t.update_voxel(key, m.hit).unwrap(),
            1 => t.update_voxel(key, m.miss).unwrap(),
            2 => t.set_voxel(key, logit(rng.random_range(0.13..0.96)) as f32).unwrap(),
            _ => {
                let a = Point3::new(coord(rng), coord(rng), coord(rng));
                let b = Point3::new(coord(rng), coord(rng), coord(rng));
                if a != b {
                    t.insert_ray(&a, &b).unwrap();
                }
            }
        }
    }
    if rng.random_bool(0.5) {
        t.prune();
    }
    t
}

fn identity_suite() -> Outcome {
    let scene = room();
    let model = OccupancyParams::default().update_model().map_err(err)?;
    let mut maps = vec![
        map_from(&scanned_cloud(&[(0.0, 0.0)], 1, 100, &sweep_model(10.0)), 0.2),
        map_from(&scanned_cloud(&[(-2.0, -1.0), (3.0, 2.0)], 2, 60, &sweep_model(5.0)), 0.1),
        ground_truth_octree(&scene, 0.25, scene.bounds(), model).map_err(err)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        maps.push(random_map(&mut rng, 0.1, 12, 300));
    }
    let mut worst = 0.0f64;
    for (i, m) in maps.iter().enumerate() {
        let bbox = default_box(m, m).map_err(err)?;
        let r = full_report(m, m, &bbox, &MetricConfig::default()).map_err(err)?;
        let w = r.weighted_iou.ok_or(format!("map {i}: weighted IoU undefined"))?;
        let l = r.log_odds.ok_or(format!("map {i}: log-odds undefined"))?.total;
        let rho = r.correlation.ok_or(format!("map {i}: correlation undefined"))?.rho;
        let dev = r.common.ok_or(format!("map {i}: no common voxels"))?.mean_probability_deviation;
        ensure((w - 1.0).abs() <= 1e-9, || format!("map {i}: weighted IoU {w}"))?;
        ensure(l.abs() <= 1e-12, || format!("map {i}: log-odds {l}"))?;
        ensure((rho - 1.0).abs() <= 1e-9, || format!("map {i}: rho {rho}"))?;
        ensure(dev == 0.0, || format!("map {i}: deviation {dev}"))?;
        worst = worst.max((w - 1.0).abs()).max(l.abs()).max((rho - 1.0).abs());
    }
    Ok(format!("{} maps, largest deviation from ideal {worst:.1e}", maps.len()))
}

/// Every metric evaluated by querying each voxel of the range separately.
fn per_voxel(a: &OccupancyOctree, b: &OccupancyOctree, range: &VoxelRange) -> [Option<f64>; 10] {
    let kind = |o: Occupancy| match o {
        Occupancy::Occupied(_) => 0,
        Occupancy::Free(_) => 1,
        Occupancy::Unknown => 2,
    };
    let mut sa: [BTreeSet<[i64; 3]>; 3] = Default::default();
    let mut sb: [BTreeSet<[i64; 3]>; 3] = Default::default();
    let mut common = Vec::new();
    for k in range.keys() {
        let (qa, qb) = (a.query_key(k), b.query_key(k));
        sa[kind(qa)].insert(k);
        sb[kind(qb)].insert(k);
        if let (Some(x), Some(y)) = (qa.probability(), qb.probability()) {
            common.push((x, y));
        }
    }
    let total = range.total() as f64;
    let r: [f64; 3] = std::array::from_fn(|t| sa[t].len() as f64 / total);
    let iou: [Option<f64>; 3] = std::array::from_fn(|t| {
        let u = sa[t].union(&sb[t]).count();
        (u > 0).then(|| sa[t].intersection(&sb[t]).count() as f64 / u as f64)
    });
    let part = |t: usize| r[t] * iou[t].unwrap_or(0.0);
    let weighted = if iou.iter().all(|v| v.is_none()) {
        None
    } else if r[0] + r[1] > 0.10 {
        Some(part(0) + part(1) + part(2))
    } else if r[0] + r[1] > 0.0 {
        Some((part(0) + part(1)) / (r[0] + r[1]))
    } else {
        None
    };
    let term = |pr: f64, pt: f64| {
        let pt = pt.clamp(1e-4, 0.9999);
        let occ = pr * (pr / pt).ln();
        let free = (1.0 - pr) * ((1.0 - pr) / (1.0 - pt)).ln();
        if pr >= 0.9999 {
            occ
        } else if pr <= 1e-4 {
            free
        } else {
            occ + free
        }
    };
    let n = common.len() as f64;
    let some = !common.is_empty();
    let log = some.then(|| common.iter().map(|&(x, y)| term(x, y)).sum::<f64>());
    let mean = some.then(|| common.iter().map(|&(x, y)| (x + y) / 2.0).sum::<f64>() / n);
    let dev = some.then(|| common.iter().map(|&(x, y)| (x - y).abs()).sum::<f64>() / n);
    let rho = mean.filter(|_| common.len() >= 2).and_then(|m| {
        let num: f64 = common.iter().map(|&(x, y)| ((x - m) * (y - m)).abs()).sum();
        let sx: f64 = common.iter().map(|&(x, _)| (x - m).powi(2)).sum();
        let sy: f64 = common.iter().map(|&(_, y)| (y - m).powi(2)).sum();
        let d = (sx * sy).sqrt();
        (d > 0.0).then(|| num / d)
    });
    [Some(r[0]), Some(r[1]), iou[0], iou[1], iou[2], weighted, log, rho, mean, dev]
}

fn report_values(r: &MetricReport) -> [Option<f64>; 10] {
    let rho = r.correlation.filter(|c| !c.degenerate).map(|c| c.rho);
    [
        r.ref_ratios.map(|x| x.r_occ),
        r.ref_ratios.map(|x| x.r_free),
        r.iou.iou_occ,
        r.iou.iou_free,
        r.iou.iou_no,
        r.weighted_iou,
        r.log_odds.map(|l| l.total),
        rho,
        r.common.map(|c| c.mean_common_probability),
        r.common.map(|c| c.mean_probability_deviation),
    ]
}

fn brute_force_equivalence() -> Outcome {
    const NAMES: [&str; 10] =
        ["r_occ", "r_free", "iou_occ", "iou_free", "iou_no", "weighted", "log_odds", "rho", "mean_p", "dev_p"];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let pairs = 120;
    let res = 0.1;
    for i in 0..pairs {
        let na = rng.random_range(5..200);
        let a = random_map(&mut rng, res, 6, na);
        let nb = rng.random_range(5..200);
        let b = random_map(&mut rng, res, 6, nb);
        let lo: [i64; 3] = [rng.random_range(-6..0), rng.random_range(-6..0), rng.random_range(-6..0)];
        let hi = [lo[0] + rng.random_range(1..=8), lo[1] + rng.random_range(1..=8), lo[2] + rng.random_range(1..=8)];
        let range = VoxelRange { lo, hi };
        let r = full_report(&a, &b, &range.to_box(res), &MetricConfig::default()).map_err(err)?;
        let got = report_values(&r);
        let want = per_voxel(&a, &b, &range);
        for (k, (g, w)) in got.iter().zip(&want).enumerate() {
            match (g, w) {
                (Some(g), Some(w)) => {
                    let e = (g - w).abs() / w.abs().max(1.0);
                    worst = worst.max(e);
                    ensure(e <= 1e-12, || format!("pair {i}: {} {g} vs {w}", NAMES[k]))?;
                }
                (None, None) => {}
                _ => return Err(format!("pair {i}: {} defined in only one evaluation ({g:?} vs {w:?})", NAMES[k])),
            }
        }
    }
    Ok(format!("{pairs} pairs, largest relative difference {worst:.1e}"))
}

fn scan_geometry() -> Outcome {
    let scene = room();
    let model = sweep_model(10.0).noiseless();
    let mut worst_surface = 0.0f64;
    let mut n = 0;
    for (x, y) in [(0.0, 0.0), (-2.5, 1.5), (3.0, -2.0)] {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pose = ScannerPose::new(x, y, 0.4).with_height(1.1);
        let scan = simulate_static_scan(&scene, pose, &model, TAU / 72.0, 36, &mut rng).map_err(err)?;
        for r in &scan.records {
            let p = transform_scan_sample(&ScannerPose::new(x, y, r.motor_yaw).with_height(1.1), &r.sample)
                .map_err(err)?;
            worst_surface = worst_surface.max(room_distance(&p));
            n += 1;
        }
    }
    ensure(n > 0, || "scan produced no points".into())?;
    ensure(worst_surface <= 1e-6, || format!("scan point {worst_surface:.2e} m off the surfaces"))?;

    // The beam is local +z tilted about x by the bearing, then turned about
    // z by the effective yaw.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_oracle = 0.0f64;
    for _ in 0..10_000 {
        let pose = ScannerPose::new(
            rng.random_range(-50.0..50.0),
            rng.random_range(-50.0..50.0),
            rng.random_range(0.0..TAU),
        )
        .with_height(rng.random_range(0.0..3.0));
        let s = ScanSample {
            bearing: rng.random_range(0.0..TAU),
            range: rng.random_range(0.01..40.0),
            timestamp: 0.0,
            motor_step: rng.random_range(0.0..0.2),
        };
        let got = transform_scan_sample(&pose, &s).map_err(err)?;
        let yaw = if s.bearing <= PI { pose.yaw() } else { pose.yaw() + s.motor_step };
        let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), yaw)
            * Rotation3::from_axis_angle(&Vector3::x_axis(), -s.bearing);
        let v = rot * Vector3::new(0.0, 0.0, s.range) + Vector3::new(pose.x, pose.y, pose.z_offset);
        worst_oracle = worst_oracle.max((Vector3::new(got.x, got.y, got.z) - v).norm());
    }
    ensure(worst_oracle <= 1e-9, || format!("rotation oracle differs by {worst_oracle:.2e} m"))?;
    Ok(format!(
        "{n} noiseless points within {worst_surface:.1e} m of a surface; 10000 oracle pairs within {worst_oracle:.1e} m"
    ))
}

fn rmse(stream: &[GaussianScalarEstimate], traj: &TrajectorySpec) -> f64 {
    let s: f64 = stream.iter().map(|e| angle_diff(e.mean, traj.pose_at(e.timestamp).yaw).powi(2)).sum();
    (s / stream.len() as f64).sqrt()
}

fn ci_fusion() -> Outcome {
    let scene = room();
    let traj = TrajectorySpec::new(vec![
        Waypoint { x: -4.0, y: -3.0, yaw: 0.0, t: 0.0 },
        Waypoint { x: 4.0, y: -3.0, yaw: 0.3, t: 20.0 },
        Waypoint { x: 4.0, y: 3.0, yaw: 1.8, t: 35.0 },
        Waypoint { x: -2.0, y: 2.0, yaw: 3.0, t: 60.0 },
    ])
    .map_err(err)?;
    let rng = ChaCha8Rng::seed_from_u64(60);
    let run = simulate_trolley_run(&scene, &traj, &sweep_model(10.0), &Mount::default(), &StreamNoise::default(), &rng)
        .map_err(err)?;
    let (fused, unmatched) = fuse_yaw_streams(&run.yaw_b, &run.yaw_a, 0.05).map_err(err)?;
    ensure(unmatched == 0, || format!("{unmatched} stream B estimates without a partner"))?;
    let a = rmse(&run.yaw_a, &traj);
    let b = rmse(&run.yaw_b, &traj);
    let d = rmse(&run.drift, &traj);
    let f = rmse(&fused, &traj);
    let msg = format!("yaw RMSE fused {f:.4} rad, A {a:.4}, B {b:.4}, drift {d:.4}");
    ensure(f <= a.min(b) * 1.05, || msg.clone())?;
    ensure(f < 0.5 * d, || msg.clone())?;
    Ok(msg)
}

fn degradation() -> Outcome {
    let reference = map_from(&scanned_cloud(&[(0.0, 0.0), (-3.0, 2.0)], 9, 90, &sweep_model(10.0)), 0.2);
    let m = *reference.model();
    let bbox = default_box(&reference, &reference).map_err(err)?;
    let range = bbox.voxel_range(reference.resolution());
    let mut occupied: Vec<[i64; 3]> = reference
        .known_voxels(&range)
        .into_iter()
        .filter(|&(_, l)| matches!(m.classify(l), Occupancy::Occupied(_)))
        .map(|(k, _)| k)
        .collect();
    let n = occupied.len();
    ensure(n > 0, || "reference has no occupied voxels".into())?;
    // One fixed shuffle, so every flip set contains the previous one.
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in (1..n).rev() {
        occupied.swap(i, rng.random_range(0..=i));
    }
    let mut rows = Vec::new();
    for pct in [0usize, 10, 20, 30, 40, 50] {
        let k = n * pct / 100;
        let mut target = reference.clone();
        for key in &occupied[..k] {
            target.set_voxel(*key, m.clamp_min).map_err(err)?;
        }
        let r = full_report(&reference, &target, &bbox, &MetricConfig::default()).map_err(err)?;
        let iou = r.iou.iou_occ.ok_or("IoU_occ undefined")?;
        let exact = (n - k) as f64 / n as f64;
        ensure(iou == exact, || format!("{pct}%: IoU_occ {iou} != {}/{n}", n - k))?;
        let rho = r.correlation.ok_or("rho undefined")?.rho;
        let log = r.log_odds.ok_or("log-odds undefined")?.total;
        rows.push((pct, rho, log));
    }
    let rhos: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.1)).collect();
    let logs: Vec<String> = rows.iter().map(|r| format!("{:.1}", r.2)).collect();
    let summary = format!("{n} occupied voxels; rho {}; log-odds {}", rhos.join(" "), logs.join(" "));
    for w in rows.windows(2) {
        let ((p0, r0, l0), (p1, r1, l1)) = (w[0], w[1]);
        ensure(r1 <= r0, || format!("rho rose between {p0}% and {p1}%; {summary}"))?;
        ensure(l1 >= l0, || format!("log-odds fell between {p0}% and {p1}%; {summary}"))?;
    }
    Ok(summary)
}

fn noise_model() -> Outcome {
    let model = sweep_model(1.0);
    let mut noise = ChaCha8Rng::seed_from_u64(2);
    let mut ranges = ChaCha8Rng::seed_from_u64(3);
    let n = 10_000;
    let (mut sum, mut used) = (0.0, 0);
    while used < n {
        let r = ranges.random_range(2.0..model.max_range);
        if let Some(measured) = apply_noise(&model, r, &mut noise) {
            sum += ((measured - r) / r).abs();
            used += 1;
        }
    }
    let mean = sum / n as f64;
    let msg = format!("mean relative error {:.3}% over {n} samples at 2-{} m", mean * 100.0, model.max_range);
    ensure((0.015..=0.025).contains(&mean), || msg.clone())?;
    Ok(msg)
}

fn performance() -> Outcome {
    let model = sweep_model(5.0);
    let a = map_from(&scanned_cloud(&[(0.0, 0.0), (-3.0, 2.0), (3.0, -2.0)], 21, 120, &model), 0.2);
    let b = map_from(&scanned_cloud(&[(0.5, 0.5), (-2.5, -2.0), (2.0, 2.0)], 31, 120, &model), 0.2);
    let bbox = default_box(&a, &b).map_err(err)?;
    let start = Instant::now();
    let r = full_report(&a, &b, &bbox, &MetricConfig::default()).map_err(err)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let sizes = format!("{} and {} leaves", a.leaf_count(), b.leaf_count());
    ensure(wall_ms < 500.0, || format!("metric suite on {sizes} took {wall_ms:.1} ms"))?;

    let cloud = scanned_cloud(&[(0.0, 0.0), (2.0, 1.0)], 41, 60, &model);
    let resolutions = [0.4, 0.3, 0.2, 0.15, 0.1];
    let rows = sweep_resolution(&cloud, &resolutions, 5, &OccupancyParams::default(), None).map_err(err)?;
    let times: Vec<String> = rows.iter().map(|r| format!("{}m {:.1}ms", r.resolution, r.conversion_ms)).collect();
    for w in rows.windows(2) {
        ensure(w[1].conversion_ms * 2.0 >= w[0].conversion_ms, || {
            format!("conversion time dropped by more than half: {}", times.join(", "))
        })?;
    }
    Ok(format!(
        "metric suite on {sizes} in {wall_ms:.1} ms (internal {:.1} ms); conversion medians {}",
        r.evaluation_time_ms,
        times.join(", ")
    ))
}

fn octree_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut t = OccupancyOctree::new(0.1, &OccupancyParams::default()).map_err(err)?;
    let m = *t.model();
    let updates = 1_000_000;
    for i in 0..updates {
        let key = [rng.random_range(-40..40), rng.random_range(-40..40), rng.random_range(-40..40)];
        let delta = if rng.random_bool(0.5) { m.hit } else { m.miss };
        t.update_voxel(key, delta).map_err(err)?;
        if i % 1000 == 0 {
            let v = t.log_odds_at(key).ok_or("updated voxel is unknown")?;
            ensure(v >= m.clamp_min && v <= m.clamp_max, || format!("value {v} outside the clamps"))?;
        }
    }
    for leaf in t.leaves() {
        ensure(leaf.log_odds >= m.clamp_min && leaf.log_odds <= m.clamp_max, || {
            format!("leaf at {:?} holds {}", leaf.min_key, leaf.log_odds)
        })?;
    }
    // Saturate a block so that pruning has something to merge.
    for key in (VoxelRange { lo: [-16; 3], hi: [0; 3] }).keys() {
        t.set_voxel(key, m.clamp_min).map_err(err)?;
    }
    let queries: Vec<Point3> = (0..10_000)
        .map(|_| Point3::new(rng.random_range(-4.5..4.5), rng.random_range(-4.5..4.5), rng.random_range(-4.5..4.5)))
        .collect();
    let before: Vec<Occupancy> = queries.iter().map(|q| t.query(q)).collect();
    let leaves_before = t.leaf_count();
    t.prune();
    let after: Vec<Occupancy> = queries.iter().map(|q| t.query(q)).collect();
    ensure(before == after, || "a query changed after pruning".into())?;
    ensure(t.leaf_count() < leaves_before, || "pruning merged nothing".into())?;

    let bytes = t.to_bytes();
    let back = OccupancyOctree::from_bytes(&bytes).map_err(err)?;
    ensure(back == t && back.to_bytes() == bytes, || "in-memory round trip differs".into())?;
    let dir = tempfile::tempdir().map_err(err)?;
    let path = dir.path().join("tree.ot");
    lidarmap::octree::write_octree(&path, &t).map_err(err)?;
    let from_file = lidarmap::octree::read_octree(&path).map_err(err)?;
    ensure(from_file == t && from_file.to_bytes() == bytes, || "file round trip differs".into())?;
    Ok(format!(
        "{updates} updates within the clamps; 10000 queries unchanged by pruning ({leaves_before} -> {} leaves); {} byte round trip exact",
        t.leaf_count(),
        bytes.len()
    ))
}

fn main() {
    let criteria = [
        Criterion { name: "identity", limit_s: 1.0, check: identity_suite },
        Criterion { name: "brute-force equivalence", limit_s: 30.0, check: brute_force_equivalence },
        Criterion { name: "scan geometry", limit_s: 10.0, check: scan_geometry },
        Criterion { name: "yaw fusion", limit_s: 5.0, check: ci_fusion },
        Criterion { name: "degradation monotonicity", limit_s: 10.0, check: degradation },
        Criterion { name: "range noise", limit_s: 5.0, check: noise_model },
        Criterion { name: "performance", limit_s: f64::INFINITY, check: performance },
        Criterion { name: "octree invariants", limit_s: 30.0, check: octree_invariants },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let secs = start.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(msg) if secs > c.limit_s => Err(format!("{msg}; took {secs:.2} s, limit {} s", c.limit_s)),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS {} ({secs:.2} s): {msg}", c.name),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} ({secs:.2} s): {msg}", c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
