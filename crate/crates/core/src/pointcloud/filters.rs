use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use super::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{Axis, Point3};

fn cell_of(p: &Point3, side: f64) -> (i64, i64, i64) {
    (
        (p.x / side).floor() as i64,
        (p.y / side).floor() as i64,
        (p.z / side).floor() as i64,
    )
}

#[derive(Default)]
struct CellAccumulator {
    sum: Point3,
    origin_sum: Point3,
    count: usize,
}

/// Replaces the points of every occupied `leaf`-sided cube (anchored at
/// the world origin) with their centroid. Output is ordered by cube index.
pub fn voxel_downsample(cloud: &PointCloud, leaf: f64) -> Result<PointCloud> {
    if !(leaf > 0.0 && leaf.is_finite()) {
        return Err(Error::param(format!("down-sampling leaf {leaf} must be positive")));
    }
    let mut cells: BTreeMap<(i64, i64, i64), CellAccumulator> = BTreeMap::new();
    for (i, p) in cloud.points.iter().enumerate() {
        let acc = cells.entry(cell_of(p, leaf)).or_default();
        acc.sum = acc.sum + *p;
        if let Some(origins) = &cloud.sensor_origins {
            acc.origin_sum = acc.origin_sum + origins[i];
        }
        acc.count += 1;
    }
    let points = cells
        .values()
        .map(|c| c.sum * (1.0 / c.count as f64))
        .collect();
    let sensor_origins = cloud.sensor_origins.as_ref().map(|_| {
        cells
            .values()
            .map(|c| c.origin_sum * (1.0 / c.count as f64))
            .collect()
    });
    Ok(PointCloud {
        points,
        frame_id: cloud.frame_id.clone(),
        sensor_origins,
    })
}

/// Keeps the points whose `axis` coordinate lies in `[min, max]`, in order.
pub fn pass_through(cloud: &PointCloud, axis: Axis, min: f64, max: f64) -> Result<PointCloud> {
    if !(min < max) {
        return Err(Error::param(format!("pass-through needs min < max, got [{min}, {max}]")));
    }
    let keep: Vec<bool> = cloud
        .points
        .iter()
        .map(|p| (min..=max).contains(&p.axis(axis)))
        .collect();
    let select = |v: &Vec<Point3>| -> Vec<Point3> {
        v.iter()
            .zip(&keep)
            .filter_map(|(p, &k)| k.then_some(*p))
            .collect()
    };
    Ok(PointCloud {
        points: select(&cloud.points),
        frame_id: cloud.frame_id.clone(),
        sensor_origins: cloud.sensor_origins.as_ref().map(select),
    })
}

/// Moves each point to the Gaussian-weighted mean of its neighbors within
/// `radius` (itself included). Sensor origins are left untouched.
pub fn gaussian_smooth(cloud: &PointCloud, sigma: f64, radius: f64) -> Result<PointCloud> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param(format!("gaussian sigma {sigma} must be positive")));
    }
    if !(radius >= sigma && radius.is_finite()) {
        return Err(Error::param(format!("gaussian radius {radius} must be >= sigma {sigma}")));
    }
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in cloud.points.iter().enumerate() {
        grid.entry(cell_of(p, radius)).or_default().push(i);
    }
    let r2 = radius * radius;
    let inv_two_var = 1.0 / (2.0 * sigma * sigma);
    let mut neighbors = Vec::new();
    let points = cloud
        .points
        .iter()
        .map(|p| {
            let (cx, cy, cz) = cell_of(p, radius);
            neighbors.clear();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(members) = grid.get(&(cx + dx, cy + dy, cz + dz)) {
                            neighbors.extend(members.iter().copied());
                        }
                    }
                }
            }
            // Index order keeps the sum independent of hash-map layout.
            neighbors.sort_unstable();
            let mut weight_sum = 0.0;
            let mut acc = Point3::ORIGIN;
            for &j in &neighbors {
                let q = cloud.points[j];
                let d2 = (q - *p).dot(&(q - *p));
                if d2 <= r2 {
                    let w = (-d2 * inv_two_var).exp();
                    weight_sum += w;
                    acc = acc + q * w;
                }
            }
            acc * (1.0 / weight_sum)
        })
        .collect();
    Ok(PointCloud {
        points,
        frame_id: cloud.frame_id.clone(),
        sensor_origins: cloud.sensor_origins.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterStage {
    Downsample { leaf: f64 },
    PassThrough { axis: Axis, min: f64, max: f64 },
    Gaussian { sigma: f64, radius: f64 },
}

impl FilterStage {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FilterStage::Downsample { leaf } if !(leaf > 0.0) => {
                Err(Error::param(format!("leaf {leaf} must be positive")))
            }
            FilterStage::PassThrough { min, max, .. } if !(min < max) => {
                Err(Error::param(format!("pass-through needs min < max, got [{min}, {max}]")))
            }
            FilterStage::Gaussian { sigma, radius } if !(sigma > 0.0 && radius >= sigma) => Err(
                Error::param(format!("gaussian needs sigma > 0 and radius >= sigma, got {sigma}, {radius}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, cloud: &PointCloud) -> Result<PointCloud> {
        match *self {
            FilterStage::Downsample { leaf } => voxel_downsample(cloud, leaf),
            FilterStage::PassThrough { axis, min, max } => pass_through(cloud, axis, min, max),
            FilterStage::Gaussian { sigma, radius } => gaussian_smooth(cloud, sigma, radius),
        }
    }
}

/// Text form used on the command line: `downsample:LEAF`,
/// `passthrough:AXIS:MIN:MAX`, `gaussian:SIGMA:RADIUS`.
impl FromStr for FilterStage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<f64> {
            t.parse::<f64>()
                .map_err(|_| Error::param(format!("bad number {t:?} in filter stage {s:?}")))
        };
        let stage = match parts.as_slice() {
            ["downsample", leaf] => FilterStage::Downsample { leaf: num(leaf)? },
            ["passthrough", axis, min, max] => FilterStage::PassThrough {
                axis: axis.parse()?,
                min: num(min)?,
                max: num(max)?,
            },
            ["gaussian", sigma, radius] => FilterStage::Gaussian {
                sigma: num(sigma)?,
                radius: num(radius)?,
            },
            _ => return Err(Error::param(format!("unrecognised filter stage {s:?}"))),
        };
        stage.validate()?;
        Ok(stage)
    }
}

impl fmt::Display for FilterStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterStage::Downsample { leaf } => write!(f, "downsample:{leaf}"),
            FilterStage::PassThrough { axis, min, max } => write!(f, "passthrough:{axis}:{min}:{max}"),
            FilterStage::Gaussian { sigma, radius } => write!(f, "gaussian:{sigma}:{radius}"),
        }
    }
}

/// Parameters shared by the named pipelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetParams {
    pub leaf: f64,
    pub pass_axis: Axis,
    pub pass_min: f64,
    pub pass_max: f64,
    pub gauss_sigma: f64,
    pub gauss_radius: f64,
}

impl Default for PresetParams {
    fn default() -> Self {
        PresetParams {
            leaf: 0.05,
            pass_axis: Axis::Z,
            pass_min: -1.0,
            pass_max: 3.0,
            gauss_sigma: 0.02,
            gauss_radius: 0.06,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterPipeline {
    pub stages: Vec<FilterStage>,
}

impl FilterPipeline {
    pub fn new(stages: Vec<FilterStage>) -> Result<Self> {
        let p = FilterPipeline { stages };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.stages.iter().try_for_each(FilterStage::validate)
    }

    /// Named per-map pipelines.
    ///
    /// | name            | down-sample | pass-through | gaussian |
    /// |-----------------|-------------|--------------|----------|
    /// | `map1` / `pc1`  |             | x            |          |
    /// | `map2` / `pc2`  | x           | x            |          |
    /// | `map3` / `pc3`  | x           | x            |          |
    /// | `ref`  / `pc4`  | x           | x            | x        |
    /// | `none`          |             |              |          |
    pub fn preset(name: &str, params: &PresetParams) -> Result<Self> {
        let down = FilterStage::Downsample { leaf: params.leaf };
        let pass = FilterStage::PassThrough {
            axis: params.pass_axis,
            min: params.pass_min,
            max: params.pass_max,
        };
        let gauss = FilterStage::Gaussian {
            sigma: params.gauss_sigma,
            radius: params.gauss_radius,
        };
        let stages = match name {
            "none" | "identity" => vec![],
            "map1" | "pc1" => vec![pass],
            "map2" | "map3" | "pc2" | "pc3" => vec![down, pass],
            "ref" | "pc4" => vec![down, pass, gauss],
            other => return Err(Error::param(format!("unknown filter preset {other:?}"))),
        };
        FilterPipeline::new(stages)
    }
}

/// Runs the stages in order.
pub fn apply_pipeline(cloud: &PointCloud, pipeline: &FilterPipeline) -> Result<PointCloud> {
    pipeline.validate()?;
    let mut current = cloud.clone();
    for stage in &pipeline.stages {
        current = stage.apply(&current)?;
    }
    Ok(current)
}
