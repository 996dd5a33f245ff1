//! Bounding boxes on the voxel grid and per-type voxel counting.

use super::{child_min, Node, Occupancy, OccupancyOctree, VoxelKey};
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Axis-aligned box in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point3,
    pub max: Point3,
}

// Relative slack when snapping to the grid, so that 0.6 / 0.2 counts as 3.
const SNAP_EPS: f64 = 1e-9;

fn snap_down(v: f64) -> i64 {
    let r = v.round();
    if (v - r).abs() <= SNAP_EPS * v.abs().max(1.0) {
        r as i64
    } else {
        v.floor() as i64
    }
}

fn snap_up(v: f64) -> i64 {
    let r = v.round();
    if (v - r).abs() <= SNAP_EPS * v.abs().max(1.0) {
        r as i64
    } else {
        v.ceil() as i64
    }
}

impl BoundingBox {
    pub fn new(min: Point3, max: Point3) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::domain("non-finite bounding box"));
        }
        if !(min.x < max.x && min.y < max.y && min.z < max.z) {
            return Err(Error::domain(format!(
                "bounding box min {min:?} must be below max {max:?} on every axis"
            )));
        }
        Ok(BoundingBox { min, max })
    }

    /// Voxel index range after snapping outward to the grid.
    pub fn voxel_range(&self, resolution: f64) -> VoxelRange {
        let lo = self.min.to_array().map(|v| snap_down(v / resolution));
        let hi = self.max.to_array().map(|v| snap_up(v / resolution));
        VoxelRange { lo, hi }
    }

    /// The box grown outward to whole voxels.
    pub fn snapped(&self, resolution: f64) -> BoundingBox {
        self.voxel_range(resolution).to_box(resolution)
    }

    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            min: Point3::new(
                self.min.x.min(other.min.x),
                self.min.y.min(other.min.y),
                self.min.z.min(other.min.z),
            ),
            max: Point3::new(
                self.max.x.max(other.max.x),
                self.max.y.max(other.max.y),
                self.max.z.max(other.max.z),
            ),
        }
    }
}

/// Half-open range of voxel indices `[lo, hi)` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VoxelRange {
    pub lo: VoxelKey,
    pub hi: VoxelKey,
}

impl VoxelRange {
    pub fn to_box(&self, resolution: f64) -> BoundingBox {
        BoundingBox {
            min: Point3::from_array(self.lo.map(|v| v as f64 * resolution)),
            max: Point3::from_array(self.hi.map(|v| v as f64 * resolution)),
        }
    }

    pub fn total(&self) -> u64 {
        (0..3)
            .map(|a| (self.hi[a] - self.lo[a]).max(0) as u64)
            .product()
    }

    pub fn contains(&self, key: VoxelKey) -> bool {
        (0..3).all(|a| key[a] >= self.lo[a] && key[a] < self.hi[a])
    }

    /// Number of voxels shared with the cube at `min` of side `size`.
    pub fn overlap(&self, min: VoxelKey, size: i64) -> u64 {
        (0..3)
            .map(|a| {
                let lo = min[a].max(self.lo[a]);
                let hi = (min[a] + size).min(self.hi[a]);
                (hi - lo).max(0) as u64
            })
            .product()
    }

    pub fn keys(&self) -> impl Iterator<Item = VoxelKey> + '_ {
        (self.lo[0]..self.hi[0]).flat_map(move |x| {
            (self.lo[1]..self.hi[1]).flat_map(move |y| (self.lo[2]..self.hi[2]).map(move |z| [x, y, z]))
        })
    }
}

/// Finest-resolution voxel counts inside a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VoxelCounts {
    pub n_occ: u64,
    pub n_free: u64,
    /// Unknown voxels: no node covers them.
    pub n_no: u64,
    /// Structural leaves intersecting the box.
    pub leaf_count: u64,
}

impl VoxelCounts {
    pub fn total(&self) -> u64 {
        self.n_occ + self.n_free + self.n_no
    }

    pub fn known(&self) -> u64 {
        self.n_occ + self.n_free
    }
}

/// Classifies every voxel of `bbox` (snapped to the tree's grid). A pruned
/// leaf contributes all of its voxels that fall inside the box.
pub fn count_voxels(tree: &OccupancyOctree, bbox: &BoundingBox) -> VoxelCounts {
    let range = bbox.voxel_range(tree.resolution());
    let mut counts = VoxelCounts::default();
    fn walk(
        tree: &OccupancyOctree,
        node: &Node,
        min: VoxelKey,
        size: i64,
        range: &VoxelRange,
        counts: &mut VoxelCounts,
    ) {
        let n = range.overlap(min, size);
        if n == 0 {
            return;
        }
        match node {
            Node::Leaf(v) => {
                counts.leaf_count += 1;
                match tree.model().classify(*v) {
                    Occupancy::Occupied(_) => counts.n_occ += n,
                    _ => counts.n_free += n,
                }
            }
            Node::Inner(children) => {
                for (c, child) in children.iter().enumerate() {
                    if let Some(child) = child {
                        walk(tree, child, child_min(min, size, c), size / 2, range, counts);
                    }
                }
            }
        }
    }
    if let Some(root) = tree.root_node() {
        walk(tree, root, tree.root_min(), tree.root_voxels(), &range, &mut counts);
    }
    counts.n_no = range.total() - counts.known();
    counts
}
