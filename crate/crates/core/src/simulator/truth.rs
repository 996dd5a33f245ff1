//! Reference octrees rasterized straight from the scene.

use super::scene::Scene;
use crate::error::Result;
use crate::octree::{BoundingBox, OccupancyOctree, UpdateModel};
use crate::Point3;

/// Voxels are treated as half-open cubes: the far faces are pulled in by this
/// fraction of the resolution so a surface on a grid plane marks one layer.
const FAR_FACE_SHRINK: f64 = 1e-9;

/// Every voxel of `bbox` that touches a primitive surface is occupied at the
/// upper clamp, every other voxel of the box is free at the lower clamp, and
/// everything outside stays unknown. The result is pruned.
pub fn ground_truth_octree(
    scene: &Scene,
    resolution: f64,
    bbox: &BoundingBox,
    model: UpdateModel,
) -> Result<OccupancyOctree> {
    let mut tree = OccupancyOctree::with_model(resolution, model)?;
    let range = bbox.voxel_range(resolution);
    let shrink = FAR_FACE_SHRINK * resolution;
    for key in range.keys() {
        let lo = Point3::from_array(key.map(|k| k as f64 * resolution));
        let hi = Point3::from_array(key.map(|k| (k + 1) as f64 * resolution - shrink));
        let occupied = scene.primitives().iter().any(|p| p.shape.touches_cube(&lo, &hi));
        let value = if occupied { model.clamp_max } else { model.clamp_min };
        tree.set_voxel(key, value)?;
    }
    tree.prune();
    Ok(tree)
}
