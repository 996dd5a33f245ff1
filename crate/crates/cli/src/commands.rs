//! Subcommand implementations. Each one validates and computes everything
//! before writing any output file.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lidarmap::fmt::sig9;
use lidarmap::geometry::Axis;
use lidarmap::metrics::{default_box, format_report, full_report, report_csv_header, report_csv_row, MetricConfig, RatioMode};
use lidarmap::octree::{dump_ascii, read_octree, write_octree, BoundingBox, OccupancyOctree, OccupancyParams};
use lidarmap::pointcloud::{apply_pipeline, read_pointcloud, write_pointcloud, FilterPipeline, FilterStage, PresetParams};
use lidarmap::reconstruct::{build_session, YawSource};
use lidarmap::simulator::{ground_truth_octree, read_scene, simulate_session, write_session, SessionMode};
use lidarmap::sweep::{format_sweep, sweep_resolution};
use lidarmap::Point3;

use crate::config::FileConfig;
use crate::{BuildArgs, Cli, CliError, Command, CompareArgs, FilterArgs, SimulateArgs, SweepArgs, ToOctreeArgs};

const DEFAULT_RESOLUTION: f64 = 0.1;
const DEFAULT_TRIALS: usize = 5;

struct Globals {
    seed: Option<u64>,
    resolution: f64,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let resolution = cli.resolution.or(file.resolution).unwrap_or(DEFAULT_RESOLUTION);
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(CliError::Usage(format!("resolution must be positive, got {resolution}")));
    }
    let g = Globals {
        seed: cli.seed.or(file.seed),
        resolution,
    };
    match cli.command {
        Command::Simulate(a) => simulate(a, file, &g),
        Command::Build(a) => build(a, file),
        Command::Filter(a) => filter(a, file),
        Command::ToOctree(a) => to_octree(a, file, &g),
        Command::Compare(a) => compare(a, file),
        Command::Sweep(a) => sweep(a, file),
    }
}

fn required(v: Option<PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

fn distinct(input: &Path, output: &Path) -> Result<(), CliError> {
    let same = input == output
        || matches!((input.canonicalize(), output.canonicalize()), (Ok(a), Ok(b)) if a == b);
    if same {
        return Err(CliError::Usage(format!(
            "input and output are the same path: {}",
            input.display()
        )));
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| lidarmap::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn simulate(a: SimulateArgs, file: FileConfig, g: &Globals) -> Result<(), CliError> {
    let sec = file.simulate;
    let scene_path = required(a.scene.or(sec.scene), "scene")?;
    let out = required(a.out.or(sec.out), "out")?;
    let mut cfg = sec.session.unwrap_or_default();
    if let Some(mode) = a.mode {
        cfg.mode = match mode.as_str() {
            "static" => SessionMode::Static,
            "trolley" => SessionMode::Trolley,
            other => return Err(CliError::Usage(format!("unknown mode {other:?} (static, trolley)"))),
        };
    }
    if let Some(s) = a.sensor {
        cfg.sensor = s;
    }
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    let ground_truth = a.ground_truth.or(sec.ground_truth);

    let scene = read_scene(&scene_path)?;
    let session = simulate_session(&scene, &cfg)?;
    let truth = match &ground_truth {
        Some(_) => Some(ground_truth_octree(
            &scene,
            g.resolution,
            scene.bounds(),
            OccupancyParams::default().update_model()?,
        )?),
        None => None,
    };

    write_session(&out, &session)?;
    if let (Some(path), Some(tree)) = (&ground_truth, &truth) {
        write_octree(path, tree)?;
    }
    println!("session: {}", out.display());
    println!("mode: {:?}", cfg.mode);
    println!("seed: {}", cfg.seed);
    println!("samples: {}", session.sample_count);
    if let Some(tree) = &truth {
        println!("ground_truth_leaves: {}", tree.leaf_count());
    }
    Ok(())
}

fn build(a: BuildArgs, file: FileConfig) -> Result<(), CliError> {
    let sec = file.build;
    let session = required(a.session.or(sec.session), "session")?;
    let out = required(a.out.or(sec.out), "out")?;
    distinct(&session, &out)?;
    let source: YawSource = a
        .yaw_source
        .or(sec.yaw_source)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or_default();
    let built = build_session(&session, source)?;
    write_pointcloud(&out, &built.cloud)?;
    println!("samples: {}", built.samples);
    println!("points: {}", built.cloud.len());
    println!("unmatched_estimates: {}", built.unmatched);
    println!("skipped_samples: {}", built.skipped);
    println!("warnings: {}", built.warnings());
    Ok(())
}

fn filter(a: FilterArgs, file: FileConfig) -> Result<(), CliError> {
    let sec = file.filter;
    let input = required(a.input.or(sec.input), "input")?;
    let out = required(a.out.or(sec.out), "out")?;
    distinct(&input, &out)?;
    let stages = if a.stages.is_empty() { sec.stages.unwrap_or_default() } else { a.stages };
    let pipeline = if !stages.is_empty() {
        FilterPipeline::new(
            stages
                .iter()
                .map(|s| s.parse::<FilterStage>())
                .collect::<lidarmap::Result<Vec<_>>>()?,
        )?
    } else {
        let defaults = PresetParams::default();
        let params = PresetParams {
            leaf: sec.leaf.unwrap_or(defaults.leaf),
            pass_axis: match sec.pass_axis {
                Some(s) => s.parse::<Axis>()?,
                None => defaults.pass_axis,
            },
            pass_min: sec.pass_min.unwrap_or(defaults.pass_min),
            pass_max: sec.pass_max.unwrap_or(defaults.pass_max),
            gauss_sigma: sec.gauss_sigma.unwrap_or(defaults.gauss_sigma),
            gauss_radius: sec.gauss_radius.unwrap_or(defaults.gauss_radius),
        };
        let name = a.preset.or(sec.preset).unwrap_or_else(|| "none".into());
        FilterPipeline::preset(&name, &params)?
    };
    let cloud = read_pointcloud(&input)?;
    let filtered = apply_pipeline(&cloud, &pipeline)?;
    write_pointcloud(&out, &filtered)?;
    let names: Vec<String> = pipeline.stages.iter().map(|s| s.to_string()).collect();
    println!("stages: {}", if names.is_empty() { "none".into() } else { names.join(" ") });
    println!("points_before: {}", cloud.len());
    println!("points_after: {}", filtered.len());
    Ok(())
}

fn to_octree(a: ToOctreeArgs, file: FileConfig, g: &Globals) -> Result<(), CliError> {
    let sec = file.to_octree;
    let input = required(a.input.or(sec.input), "input")?;
    let out = required(a.out.or(sec.out), "out")?;
    distinct(&input, &out)?;
    let d = OccupancyParams::default();
    let params = OccupancyParams {
        prob_hit: sec.prob_hit.unwrap_or(d.prob_hit),
        prob_miss: sec.prob_miss.unwrap_or(d.prob_miss),
        clamp_min: sec.clamp_min.unwrap_or(d.clamp_min),
        clamp_max: sec.clamp_max.unwrap_or(d.clamp_max),
        occupancy_threshold: sec.occupancy_threshold.unwrap_or(d.occupancy_threshold),
    };
    params.update_model()?;
    let origin = a.origin.or(sec.origin).map(Point3::from_array);
    let cloud = read_pointcloud(&input)?;
    let start = Instant::now();
    let tree = OccupancyOctree::from_pointcloud(&cloud, g.resolution, &params, origin)?;
    let build_ms = start.elapsed().as_secs_f64() * 1e3;
    write_octree(&out, &tree)?;
    if let Some(dump) = a.dump.or(sec.dump) {
        write_text(&dump, &dump_ascii(&tree))?;
    }
    println!("resolution: {}", sig9(g.resolution));
    println!("points: {}", cloud.len());
    println!("leaf_count: {}", tree.leaf_count());
    println!("build_time_ms: {}", sig9(build_ms));
    Ok(())
}

fn compare(a: CompareArgs, file: FileConfig) -> Result<(), CliError> {
    let sec = file.compare;
    let ref_path = required(a.reference.or(sec.reference), "reference")?;
    let tar_path = required(a.target.or(sec.target), "target")?;
    let literal = a.literal || sec.literal.unwrap_or(false);
    let ratios: RatioMode = a.ratios.or(sec.ratios).map(|s| s.parse()).transpose()?.unwrap_or_default();
    let reference = read_octree(&ref_path)?;
    let target = read_octree(&tar_path)?;
    lidarmap::metrics::check_compatible(&reference, &target)?;
    let bbox = match a.bbox.or(sec.bbox) {
        Some(b) => BoundingBox::new(Point3::new(b[0], b[1], b[2]), Point3::new(b[3], b[4], b[5]))
            .map_err(|e| CliError::Usage(e.to_string()))?,
        None => default_box(&reference, &target)?,
    };
    let report = full_report(&reference, &target, &bbox, &MetricConfig { literal_weighting: literal })?;
    let text = format_report(&report);
    if let Some(out) = a.out.or(sec.out) {
        write_text(&out, &text)?;
    }
    if let Some(csv) = a.csv.or(sec.csv) {
        let label = a.label.or(sec.label).unwrap_or_else(|| tar_path.display().to_string());
        let fresh = !csv.exists();
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&csv)
            .map_err(|e| lidarmap::Error::Io { path: csv.clone(), source: e })?;
        let mut row = String::new();
        if fresh {
            row.push_str(report_csv_header());
            row.push('\n');
        }
        row.push_str(&report_csv_row(&label, &report, ratios));
        row.push('\n');
        f.write_all(row.as_bytes())
            .map_err(|e| lidarmap::Error::Io { path: csv.clone(), source: e })?;
    }
    print!("{text}");
    Ok(())
}

fn sweep(a: SweepArgs, file: FileConfig) -> Result<(), CliError> {
    let sec = file.sweep;
    let input = required(a.input.or(sec.input), "input")?;
    let resolutions = if a.resolutions.is_empty() { sec.resolutions.unwrap_or_default() } else { a.resolutions };
    if resolutions.is_empty() {
        return Err(CliError::Usage("missing --resolutions".into()));
    }
    if resolutions.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(CliError::Usage("resolutions must be positive".into()));
    }
    let trials = a.trials.or(sec.trials).unwrap_or(DEFAULT_TRIALS);
    let origin = a.origin.or(sec.origin).map(Point3::from_array);
    let cloud = read_pointcloud(&input)?;
    let rows = sweep_resolution(&cloud, &resolutions, trials, &OccupancyParams::default(), origin)?;
    let table = format_sweep(&rows);
    if let Some(out) = a.out.or(sec.out) {
        write_text(&out, &table)?;
    }
    print!("{table}");
    Ok(())
}
