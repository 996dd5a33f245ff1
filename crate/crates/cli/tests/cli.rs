use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const ROOM: &str = "box 0 0 1.5 8 6 3\nbox 1 1 0.4 1.6 0.8 0.8\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lidarmap"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = run(dir, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

fn value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .to_string()
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("room.scene"), ROOM).unwrap();
    std::fs::write(dir.path().join("run.toml"), config).unwrap();
    dir
}

const STATIC_EXACT: &str = r#"
[simulate]
scene = "room.scene"
[simulate.session]
frequency = 10.0
motor_step_deg = 36.0
relative_sigma = 0.0
sigma_floor = 0.0
stations = [{ x = -1.0, y = 0.5 }]
"#;

/// Distance to the nearest surface of `ROOM`, computed independently.
fn room_distance(p: [f64; 3]) -> f64 {
    let walls = [p[0] + 4.0, 4.0 - p[0], p[1] + 3.0, 3.0 - p[1], p[2], 3.0 - p[2]]
        .into_iter()
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min);
    // Table: x in [0.2, 1.8], y in [0.6, 1.4], z in [0, 0.8].
    let (lo, hi) = ([0.2, 0.6, 0.0], [1.8, 1.4, 0.8]);
    let inside = (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a]);
    let table = if inside {
        (0..3).map(|a| (p[a] - lo[a]).min(hi[a] - p[a])).fold(f64::INFINITY, f64::min)
    } else {
        (0..3)
            .map(|a| (lo[a] - p[a]).max(p[a] - hi[a]).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    walls.min(table)
}

fn cloud_points(path: &Path) -> Vec<[f64; 3]> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().take(3).map(|t| t.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect()
}

#[test]
fn simulate_writes_one_line_per_sample_and_is_deterministic() {
    let dir = setup(STATIC_EXACT);
    let d = dir.path();
    let out = ok(d, &["--config", "run.toml", "--seed", "4", "simulate", "--out", "a"]);
    assert_eq!(value(&out, "samples"), "500");
    let log = std::fs::read_to_string(d.join("a/scan_000.log")).unwrap();
    // 100 samples per revolution, 5 revolutions, closed room.
    assert_eq!(log.lines().count(), 500);

    std::fs::write(d.join("noisy.toml"), STATIC_EXACT.replace("relative_sigma = 0.0\nsigma_floor = 0.0\n", "")).unwrap();
    ok(d, &["--config", "noisy.toml", "--seed", "4", "simulate", "--out", "b"]);
    ok(d, &["--config", "noisy.toml", "--seed", "4", "simulate", "--out", "c"]);
    ok(d, &["--config", "noisy.toml", "--seed", "5", "simulate", "--out", "e"]);
    for f in ["scan_000.log", "session.toml"] {
        assert_eq!(std::fs::read(d.join("b").join(f)).unwrap(), std::fs::read(d.join("c").join(f)).unwrap());
    }
    assert_ne!(
        std::fs::read(d.join("b/scan_000.log")).unwrap(),
        std::fs::read(d.join("e/scan_000.log")).unwrap()
    );
}

#[test]
fn simulate_failures_leave_no_output() {
    let dir = setup(STATIC_EXACT);
    let d = dir.path();
    let o = run(d, &["simulate", "--scene", "missing.scene", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!d.join("x").exists());

    std::fs::write(d.join("bad.toml"), "[simulate]\nscene = \"room.scene\"\n[simulate.session]\nmotor_step_deg = 7.0\n").unwrap();
    let o = run(d, &["--config", "bad.toml", "simulate", "--out", "y"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!d.join("y").exists());

    std::fs::write(d.join("typo.toml"), "resolutoin = 0.2\n").unwrap();
    assert_eq!(run(d, &["--config", "typo.toml", "simulate", "--out", "z"]).status.code(), Some(1));
    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(d, &["--resolution", "-1", "to-octree"]).status.code(), Some(1));
}

#[test]
fn static_build_lands_on_surfaces() {
    let dir = setup(STATIC_EXACT);
    let d = dir.path();
    ok(d, &["--config", "run.toml", "simulate", "--out", "s"]);
    let out = ok(d, &["build", "--session", "s", "--out", "c.pc"]);
    assert_eq!(value(&out, "points"), "500");
    assert_eq!(value(&out, "warnings"), "0");
    for p in cloud_points(&d.join("c.pc")) {
        assert!(room_distance(p) < 1e-6, "{p:?}");
    }
}

#[test]
fn trolley_build_with_true_poses_lands_on_surfaces() {
    let cfg = r#"
[simulate]
scene = "room.scene"
[simulate.session]
mode = "trolley"
frequency = 10.0
relative_sigma = 0.0
sigma_floor = 0.0
waypoints = [
  { x = -3.0, y = -2.0, yaw = 0.0, t = 0.0 },
  { x = 2.5, y = -2.0, yaw = 0.5, t = 4.0 },
  { x = 2.5, y = 2.0, yaw = 1.6, t = 8.0 },
]
"#;
    let dir = setup(cfg);
    let d = dir.path();
    ok(d, &["--config", "run.toml", "simulate", "--out", "s"]);
    let out = ok(d, &["build", "--session", "s", "--out", "c.pc", "--yaw-source", "truth"]);
    assert_eq!(value(&out, "warnings"), "0");
    let pts = cloud_points(&d.join("c.pc"));
    assert_eq!(pts.len(), 8001);
    for p in pts {
        assert!(room_distance(p) < 1e-6, "{p:?}");
    }
    // Fused streams work on the same session.
    let out = ok(d, &["build", "--session", "s", "--out", "f.pc"]);
    assert_eq!(value(&out, "points"), "8001");
}

#[test]
fn all_dropouts_give_an_empty_cloud_error() {
    let dir = setup("[simulate]\nscene = \"big.scene\"\n[simulate.session]\nsensor = \"rplidar_like\"\nmotor_step_deg = 90.0\n");
    let d = dir.path();
    std::fs::write(d.join("big.scene"), "box 0 0 0 40 40 40\n").unwrap();
    let out = ok(d, &["--config", "run.toml", "simulate", "--out", "s"]);
    assert_eq!(value(&out, "samples"), "0");
    let o = run(d, &["build", "--session", "s", "--out", "c.pc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty cloud"));
    assert!(!d.join("c.pc").exists());
}

fn make_cloud(d: &Path) -> PathBuf {
    let dir = setup(STATIC_EXACT);
    ok(dir.path(), &["--config", "run.toml", "simulate", "--out", "s"]);
    ok(dir.path(), &["build", "--session", "s", "--out", "c.pc"]);
    let dst = d.join("c.pc");
    std::fs::copy(dir.path().join("c.pc"), &dst).unwrap();
    dst
}

#[test]
fn filter_presets_and_errors() {
    let dir = setup(STATIC_EXACT);
    let d = dir.path();
    make_cloud(d);
    let out = ok(d, &["filter", "--input", "c.pc", "--out", "same.pc", "--preset", "none"]);
    assert_eq!(value(&out, "points_before"), value(&out, "points_after"));
    assert_eq!(std::fs::read(d.join("c.pc")).unwrap(), std::fs::read(d.join("same.pc")).unwrap());

    let out = ok(d, &["filter", "--input", "c.pc", "--out", "ref.pc", "--preset", "ref"]);
    assert_eq!(value(&out, "stages"), "downsample:0.05 passthrough:z:-1:3 gaussian:0.02:0.06");

    let o = run(d, &["filter", "--input", "c.pc", "--out", "x.pc", "--stage", "passthrough:w:0:1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(d, &["filter", "--input", "c.pc", "--out", "x.pc", "--preset", "map9"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(d, &["filter", "--input", "c.pc", "--out", "c.pc"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn to_octree_cases() {
    let dir = setup(STATIC_EXACT);
    let d = dir.path();
    std::fs::write(d.join("empty.pc"), "0 0\n").unwrap();
    let out = ok(d, &["to-octree", "--input", "empty.pc", "--out", "empty.ot"]);
    assert_eq!(value(&out, "leaf_count"), "0");

    std::fs::write(d.join("bare.pc"), "2 0\n1 0 0\n0 1 0.5\n").unwrap();
    let o = run(d, &["to-octree", "--input", "bare.pc", "--out", "bare.ot"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!d.join("bare.ot").exists());
    ok(d, &["to-octree", "--input", "bare.pc", "--out", "bare.ot", "--origin", "0,0,0"]);

    make_cloud(d);
    let out = ok(d, &["--resolution", "0.2", "to-octree", "--input", "c.pc", "--out", "a.ot", "--dump", "a.txt"]);
    ok(d, &["--resolution", "0.2", "to-octree", "--input", "c.pc", "--out", "b.ot"]);
    assert_eq!(std::fs::read(d.join("a.ot")).unwrap(), std::fs::read(d.join("b.ot")).unwrap());
    let leaves: usize = value(&out, "leaf_count").parse().unwrap();
    let dump = std::fs::read_to_string(d.join("a.txt")).unwrap();
    assert_eq!(dump.lines().filter(|l| !l.starts_with('#')).count(), leaves);
}

#[test]
fn compare_identity_degradation_and_errors() {
    let dir = setup(STATIC_EXACT);
    let d = dir.path();
    make_cloud(d);
    ok(d, &["--resolution", "0.2", "to-octree", "--input", "c.pc", "--out", "m.ot"]);
    let same = ok(d, &["compare", "--reference", "m.ot", "--target", "m.ot", "--out", "r.txt", "--csv", "t.csv"]);
    assert_eq!(value(&same, "weighted_iou"), "1");
    assert_eq!(value(&same, "log_odds_total"), "0");
    assert_eq!(value(&same, "rho"), "1");
    assert_eq!(value(&same, "mean_probability_deviation"), "0");
    assert_eq!(std::fs::read_to_string(d.join("r.txt")).unwrap(), same);
    let csv = std::fs::read_to_string(d.join("t.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);

    // Degraded target: fewer points and a shifted sensor origin.
    ok(d, &["filter", "--input", "c.pc", "--out", "thin.pc", "--stage", "downsample:0.5"]);
    ok(d, &["--resolution", "0.2", "to-octree", "--input", "thin.pc", "--out", "thin.ot"]);
    let worse = ok(d, &["compare", "--reference", "m.ot", "--target", "thin.ot"]);
    assert!(value(&worse, "weighted_iou").parse::<f64>().unwrap() < 1.0);
    assert!(value(&worse, "log_odds_total").parse::<f64>().unwrap() > 0.0);
    assert!(value(&worse, "rho").parse::<f64>().unwrap() < 1.0);

    assert_eq!(value(&same, "weighting"), "all_types");
    // A box far larger than the map leaves under 10 % of it known.
    let wide = ["compare", "--reference", "m.ot", "--target", "m.ot", "--box", "-40,-40,-10,40,40,20"];
    let renorm = ok(d, &wide);
    assert_eq!(value(&renorm, "weighting"), "known_renormalized");
    assert_eq!(value(&renorm, "weighted_iou"), "1");
    let literal = ok(d, &[&wide[..], &["--literal"]].concat());
    assert_eq!(value(&literal, "weighting"), "known_literal");
    let known = value(&literal, "ref_r_occ").parse::<f64>().unwrap() + value(&literal, "ref_r_free").parse::<f64>().unwrap();
    let w = value(&literal, "weighted_iou").parse::<f64>().unwrap();
    assert!(known < 0.1 && (w - known).abs() < 1e-8, "{w} vs {known}");

    assert_eq!(run(d, &["compare", "--reference", "m.ot", "--target", "nope.ot"]).status.code(), Some(2));
    ok(d, &["--resolution", "0.25", "to-octree", "--input", "c.pc", "--out", "coarse.ot"]);
    let o = run(d, &["compare", "--reference", "m.ot", "--target", "coarse.ot"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("incompatible"));
}

#[test]
fn sweep_rows() {
    let dir = setup(STATIC_EXACT);
    let d = dir.path();
    make_cloud(d);
    let one = ok(d, &["sweep", "--input", "c.pc", "--resolutions", "0.3", "--trials", "1"]);
    assert_eq!(one.lines().count(), 2);
    let many = ok(d, &["sweep", "--input", "c.pc", "--resolutions", "0.4,0.2", "--trials", "3", "--out", "sw.csv"]);
    let rows: Vec<&str> = many.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let cols: Vec<&str> = r.split(',').collect();
        assert_eq!(&cols[5..], ["1", "0", "1"]);
    }
    assert_eq!(std::fs::read_to_string(d.join("sw.csv")).unwrap(), many);
    assert_eq!(run(d, &["sweep", "--input", "c.pc"]).status.code(), Some(1));
}
