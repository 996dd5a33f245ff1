//! Point clouds and the post-processing filters applied before octree
//! conversion.

mod filters;
mod io;

use crate::error::{Error, Result};
use crate::geometry::Point3;

pub use filters::{
    apply_pipeline, gaussian_smooth, pass_through, voxel_downsample, FilterPipeline, FilterStage,
    PresetParams,
};
pub use io::{format_pointcloud, parse_pointcloud, read_pointcloud, write_pointcloud};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub frame_id: String,
    /// Origin of the ray that produced each point, parallel to `points`.
    pub sensor_origins: Option<Vec<Point3>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        PointCloud {
            points,
            frame_id: "map".to_string(),
            sensor_origins: None,
        }
    }

    pub fn with_origins(points: Vec<Point3>, origins: Vec<Point3>) -> Result<Self> {
        let cloud = PointCloud {
            points,
            frame_id: "map".to_string(),
            sensor_origins: Some(origins),
        };
        cloud.validate()?;
        Ok(cloud)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.points.iter().position(|p| !p.is_finite()) {
            return Err(Error::domain(format!("point {i} is not finite")));
        }
        if let Some(origins) = &self.sensor_origins {
            if origins.len() != self.points.len() {
                return Err(Error::domain(format!(
                    "{} sensor origins for {} points",
                    origins.len(),
                    self.points.len()
                )));
            }
            if origins.iter().any(|p| !p.is_finite()) {
                return Err(Error::domain("non-finite sensor origin"));
            }
        }
        Ok(())
    }

    /// Appends another cloud. Origins are kept only if both clouds have them.
    pub fn extend(&mut self, other: PointCloud) {
        let had_points = !self.points.is_empty();
        self.sensor_origins = match (self.sensor_origins.take(), other.sensor_origins) {
            (Some(mut a), Some(b)) => {
                a.extend(b);
                Some(a)
            }
            (None, Some(b)) if !had_points => Some(b),
            _ => None,
        };
        self.points.extend(other.points);
    }

    /// Axis-aligned bounds of the points (and origins, if present).
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        let origins = self.sensor_origins.iter().flatten();
        let mut it = self.points.iter().chain(origins);
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), p| {
            (
                Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z)),
                Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z)),
            )
        }))
    }
}
