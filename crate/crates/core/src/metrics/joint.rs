//! Synchronized traversal of two octrees over a voxel range.

use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::octree::{child_min, BoundingBox, Node, Occupancy, OccupancyOctree, VoxelRange};

/// Voxel type index used by the count tables.
pub(crate) const OCC: usize = 0;
pub(crate) const FREE: usize = 1;
pub(crate) const NO: usize = 2;

fn type_of(o: Occupancy) -> usize {
    match o {
        Occupancy::Occupied(_) => OCC,
        Occupancy::Free(_) => FREE,
        Occupancy::Unknown => NO,
    }
}

/// A block of voxels known in both maps with uniform probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonRegion {
    pub count: u64,
    pub p_ref: f64,
    pub p_tar: f64,
}

/// Everything the metrics need from one pass over a pair of maps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JointSummary {
    /// Voxels in the range.
    pub total: u64,
    /// `pair[r][t]`: voxels of type `r` in the reference and `t` in the
    /// target (occ, free, unknown).
    pub pair: [[u64; 3]; 3],
    pub common: Vec<CommonRegion>,
}

impl JointSummary {
    pub fn ref_counts(&self) -> [u64; 3] {
        self.pair.map(|row| row.iter().sum())
    }

    pub fn tar_counts(&self) -> [u64; 3] {
        std::array::from_fn(|t| self.pair.iter().map(|row| row[t]).sum())
    }

    pub fn common_count(&self) -> u64 {
        self.common.iter().map(|c| c.count).sum()
    }
}

pub fn check_compatible(a: &OccupancyOctree, b: &OccupancyOctree) -> Result<()> {
    let (ra, rb) = (a.resolution(), b.resolution());
    if (ra - rb).abs() > 1e-12 * ra.max(rb) {
        return Err(Error::IncompatibleMaps(format!(
            "resolutions differ: {ra} vs {rb}"
        )));
    }
    Ok(())
}

/// Walks both trees in lock step over `bbox` (snapped to the grid).
pub fn summarize(
    reference: &OccupancyOctree,
    target: &OccupancyOctree,
    bbox: &BoundingBox,
) -> Result<JointSummary> {
    check_compatible(reference, target)?;
    let depth = reference.depth().max(target.depth());
    let r = grow(reference, depth);
    let t = grow(target, depth);
    let range = bbox.voxel_range(r.resolution());

    let mut walker = Walker {
        reference: &r,
        target: &t,
        range,
        summary: JointSummary {
            total: range.total(),
            ..Default::default()
        },
    };
    walker.walk(r.root_node(), t.root_node(), r.root_min(), r.root_voxels());
    let mut s = walker.summary;
    let listed: u64 = s.pair.iter().flatten().sum();
    s.pair[NO][NO] += s.total - listed;
    Ok(s)
}

fn grow(tree: &OccupancyOctree, depth: u32) -> Cow<'_, OccupancyOctree> {
    if tree.depth() == depth {
        Cow::Borrowed(tree)
    } else {
        Cow::Owned(tree.grown_to(depth))
    }
}

struct Walker<'a> {
    reference: &'a OccupancyOctree,
    target: &'a OccupancyOctree,
    range: VoxelRange,
    summary: JointSummary,
}

fn split(node: Option<&Node>, c: usize) -> Option<&Node> {
    match node {
        Some(Node::Inner(children)) => children[c].as_ref(),
        other => other,
    }
}

impl<'a> Walker<'a> {
    fn walk(&mut self, a: Option<&'a Node>, b: Option<&'a Node>, min: [i64; 3], size: i64) {
        if a.is_none() && b.is_none() {
            return;
        }
        let n = self.range.overlap(min, size);
        if n == 0 {
            return;
        }
        if matches!(a, Some(Node::Inner(_))) || matches!(b, Some(Node::Inner(_))) {
            for c in 0..8 {
                let (ca, cb) = (split(a, c), split(b, c));
                self.walk(ca, cb, child_min(min, size, c), size / 2);
            }
            return;
        }
        let oa = leaf_state(self.reference, a);
        let ob = leaf_state(self.target, b);
        self.summary.pair[type_of(oa)][type_of(ob)] += n;
        if let (Some(p_ref), Some(p_tar)) = (oa.probability(), ob.probability()) {
            self.summary.common.push(CommonRegion { count: n, p_ref, p_tar });
        }
    }
}

fn leaf_state(tree: &OccupancyOctree, node: Option<&Node>) -> Occupancy {
    match node {
        Some(Node::Leaf(v)) => tree.model().classify(*v),
        _ => Occupancy::Unknown,
    }
}
