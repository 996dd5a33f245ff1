//! Log-odds occupancy octree.
//!
//! The root cube is centred on the world origin and spans `2^depth` voxels
//! per side; voxel `[i, j, k]` covers `[i·res, (i+1)·res)` along each axis,
//! so maps built at the same resolution share one voxel grid regardless of
//! their extent. The tree deepens automatically (by doubling the root) when
//! data falls outside it.
//!
//! Nodes are either leaves carrying a log-odds value or inner nodes with
//! eight optional children; a missing child is unknown space. A leaf above
//! the finest level stands for a uniform cube of voxels.

mod count;
mod io;
mod raycast;

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::pointcloud::PointCloud;

pub use count::{count_voxels, BoundingBox, VoxelCounts, VoxelRange};
pub use io::{dump_ascii, read_octree, write_octree, MAGIC};
pub use raycast::VoxelWalk;

/// Integer voxel index.
pub type VoxelKey = [i64; 3];

const MAX_DEPTH: u32 = 40;

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn probability(log_odds: f64) -> f64 {
    1.0 / (1.0 + (-log_odds).exp())
}

pub fn key_of(p: &Point3, resolution: f64) -> VoxelKey {
    [
        (p.x / resolution).floor() as i64,
        (p.y / resolution).floor() as i64,
        (p.z / resolution).floor() as i64,
    ]
}

pub fn key_center(key: VoxelKey, resolution: f64) -> Point3 {
    Point3::new(
        (key[0] as f64 + 0.5) * resolution,
        (key[1] as f64 + 0.5) * resolution,
        (key[2] as f64 + 0.5) * resolution,
    )
}

/// Sensor model in probability form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancyParams {
    pub prob_hit: f64,
    pub prob_miss: f64,
    pub clamp_min: f64,
    pub clamp_max: f64,
    /// Voxels with probability strictly above this are occupied.
    pub occupancy_threshold: f64,
}

impl Default for OccupancyParams {
    fn default() -> Self {
        OccupancyParams {
            prob_hit: 0.7,
            prob_miss: 0.4,
            clamp_min: 0.12,
            clamp_max: 0.97,
            occupancy_threshold: 0.5,
        }
    }
}

impl OccupancyParams {
    pub fn update_model(&self) -> Result<UpdateModel> {
        let p = self;
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if ![p.prob_hit, p.prob_miss, p.clamp_min, p.clamp_max, p.occupancy_threshold]
            .into_iter()
            .all(in_unit)
        {
            return Err(Error::param("occupancy probabilities must lie in (0, 1)"));
        }
        if !(p.prob_hit > 0.5 && p.prob_miss < 0.5) {
            return Err(Error::param("need prob_hit > 0.5 and prob_miss < 0.5"));
        }
        if !(p.clamp_min < p.clamp_max) {
            return Err(Error::param("need clamp_min < clamp_max"));
        }
        Ok(UpdateModel {
            hit: logit(p.prob_hit) as f32,
            miss: logit(p.prob_miss) as f32,
            clamp_min: logit(p.clamp_min) as f32,
            clamp_max: logit(p.clamp_max) as f32,
            occupancy_threshold: p.occupancy_threshold,
        })
    }
}

/// Sensor model in the log-odds form the tree stores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateModel {
    pub hit: f32,
    pub miss: f32,
    pub clamp_min: f32,
    pub clamp_max: f32,
    pub occupancy_threshold: f64,
}

impl UpdateModel {
    fn validate(&self) -> Result<()> {
        let finite = [self.hit, self.miss, self.clamp_min, self.clamp_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.clamp_min < self.clamp_max) || !(self.hit > 0.0 && self.miss < 0.0) {
            return Err(Error::param("invalid log-odds update model"));
        }
        if !(self.occupancy_threshold > 0.0 && self.occupancy_threshold < 1.0) {
            return Err(Error::param("occupancy threshold must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn clamp(&self, l: f32) -> f32 {
        l.clamp(self.clamp_min, self.clamp_max)
    }

    pub fn classify(&self, log_odds: f32) -> Occupancy {
        let p = probability(log_odds as f64);
        if p > self.occupancy_threshold {
            Occupancy::Occupied(p)
        } else {
            Occupancy::Free(p)
        }
    }
}

/// Classification of a voxel; known states carry the probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Occupancy {
    Occupied(f64),
    Free(f64),
    Unknown,
}

impl Occupancy {
    pub fn probability(&self) -> Option<f64> {
        match *self {
            Occupancy::Occupied(p) | Occupancy::Free(p) => Some(p),
            Occupancy::Unknown => None,
        }
    }

    pub fn is_known(&self) -> bool {
        !matches!(self, Occupancy::Unknown)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Leaf(f32),
    Inner(Box<[Option<Node>; 8]>),
}

fn empty_children() -> Box<[Option<Node>; 8]> {
    Box::new(std::array::from_fn(|_| None))
}

fn filled_children(v: f32) -> Box<[Option<Node>; 8]> {
    Box::new(std::array::from_fn(|_| Some(Node::Leaf(v))))
}

/// Offset of child `c` inside a parent cube of `size` voxels.
pub(crate) fn child_min(min: VoxelKey, size: i64, c: usize) -> VoxelKey {
    let h = size / 2;
    [
        min[0] + (c & 1) as i64 * h,
        min[1] + ((c >> 1) & 1) as i64 * h,
        min[2] + ((c >> 2) & 1) as i64 * h,
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyOctree {
    resolution: f64,
    depth: u32,
    root: Option<Node>,
    model: UpdateModel,
}

/// One leaf as seen by [`OccupancyOctree::leaves`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafRecord {
    /// Lowest voxel index covered by the leaf.
    pub min_key: VoxelKey,
    /// Side length in voxels.
    pub size: i64,
    pub center: Point3,
    /// Side length in meters.
    pub side: f64,
    pub log_odds: f32,
    pub probability: f64,
}

impl OccupancyOctree {
    pub fn new(resolution: f64, params: &OccupancyParams) -> Result<Self> {
        Self::with_model(resolution, params.update_model()?)
    }

    pub fn with_model(resolution: f64, model: UpdateModel) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::param(format!("resolution {resolution} must be positive")));
        }
        model.validate()?;
        Ok(OccupancyOctree {
            resolution,
            depth: 1,
            root: None,
            model,
        })
    }

    pub(crate) fn from_parts(resolution: f64, depth: u32, root: Option<Node>, model: UpdateModel) -> Result<Self> {
        let mut tree = Self::with_model(resolution, model)?;
        if !(1..=MAX_DEPTH).contains(&depth) {
            return Err(Error::Format(format!("tree depth {depth} out of range")));
        }
        tree.depth = depth;
        tree.root = root;
        Ok(tree)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Number of levels below the root; the root spans `2^depth` voxels.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn model(&self) -> &UpdateModel {
        &self.model
    }

    /// Half the root side, in voxels.
    fn half_voxels(&self) -> i64 {
        1i64 << (self.depth - 1)
    }

    /// Half the root side, in meters. The root is centred at the origin.
    pub fn half_size(&self) -> f64 {
        self.resolution * self.half_voxels() as f64
    }

    pub(crate) fn root_node(&self) -> Option<&Node> {
        self.root.as_ref()
    }

    pub(crate) fn root_min(&self) -> VoxelKey {
        let h = self.half_voxels();
        [-h, -h, -h]
    }

    pub(crate) fn root_voxels(&self) -> i64 {
        2 * self.half_voxels()
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn contains_key(&self, key: VoxelKey) -> bool {
        let h = self.half_voxels();
        key.iter().all(|&k| (-h..h).contains(&k))
    }

    fn depth_for(key: VoxelKey) -> Result<u32> {
        let mut depth = 1;
        while !key.iter().all(|&k| (-(1i64 << (depth - 1))..(1i64 << (depth - 1))).contains(&k)) {
            depth += 1;
            if depth > MAX_DEPTH {
                return Err(Error::domain(format!("voxel {key:?} is too far from the origin")));
            }
        }
        Ok(depth)
    }

    /// Doubles the root until it contains `key`.
    pub fn ensure_contains(&mut self, key: VoxelKey) -> Result<()> {
        let needed = Self::depth_for(key)?;
        while self.depth < needed {
            self.grow();
        }
        Ok(())
    }

    fn grow(&mut self) {
        // Old octant c becomes the child of new octant c nearest the origin.
        self.root = match self.root.take() {
            None => None,
            Some(Node::Leaf(v)) => {
                let children = std::array::from_fn(|c| {
                    let mut inner = empty_children();
                    inner[c ^ 7] = Some(Node::Leaf(v));
                    Some(Node::Inner(inner))
                });
                Some(Node::Inner(Box::new(children)))
            }
            Some(Node::Inner(old)) => {
                let mut old = *old;
                let children = std::array::from_fn(|c| {
                    old[c].take().map(|child| {
                        let mut inner = empty_children();
                        inner[c ^ 7] = Some(child);
                        Node::Inner(inner)
                    })
                });
                Some(Node::Inner(Box::new(children)))
            }
        };
        self.depth += 1;
    }

    /// Copy of this tree deepened to `depth` levels.
    pub(crate) fn grown_to(&self, depth: u32) -> Self {
        let mut t = self.clone();
        while t.depth < depth {
            t.grow();
        }
        t
    }

    fn child_index(&self, key: VoxelKey, bit: u32) -> usize {
        let h = self.half_voxels();
        let b = |k: i64| (((k + h) as u64 >> bit) & 1) as usize;
        b(key[0]) | (b(key[1]) << 1) | (b(key[2]) << 2)
    }

    /// Finest-level slot for `key`, creating inner nodes and expanding
    /// pruned leaves on the way down. `key` must be inside the root.
    fn voxel_slot(&mut self, key: VoxelKey) -> &mut Option<Node> {
        let h = self.half_voxels();
        let depth = self.depth;
        let mut slot = &mut self.root;
        for bit in (0..depth).rev() {
            let b = |k: i64| (((k + h) as u64 >> bit) & 1) as usize;
            let i = b(key[0]) | (b(key[1]) << 1) | (b(key[2]) << 2);
            match slot {
                None => *slot = Some(Node::Inner(empty_children())),
                Some(Node::Leaf(v)) => {
                    let v = *v;
                    *slot = Some(Node::Inner(filled_children(v)));
                }
                Some(Node::Inner(_)) => {}
            }
            match slot {
                Some(Node::Inner(children)) => slot = &mut children[i],
                _ => unreachable!("slot was just made inner"),
            }
        }
        slot
    }

    /// Adds `delta` to the voxel's log-odds (unknown voxels start at 0) and
    /// clamps the result.
    pub fn update_voxel(&mut self, key: VoxelKey, delta: f32) -> Result<()> {
        self.ensure_contains(key)?;
        self.apply_delta(key, delta);
        Ok(())
    }

    fn apply_delta(&mut self, key: VoxelKey, delta: f32) {
        let model = self.model;
        let slot = self.voxel_slot(key);
        let current = match slot {
            Some(Node::Leaf(v)) => *v,
            _ => 0.0,
        };
        *slot = Some(Node::Leaf(model.clamp(current + delta)));
    }

    /// Overwrites the voxel's log-odds, clamped into bounds.
    pub fn set_voxel(&mut self, key: VoxelKey, log_odds: f32) -> Result<()> {
        if !log_odds.is_finite() {
            return Err(Error::domain("non-finite log-odds"));
        }
        self.ensure_contains(key)?;
        let v = self.model.clamp(log_odds);
        *self.voxel_slot(key) = Some(Node::Leaf(v));
        Ok(())
    }

    /// Applies the hit update to the voxel containing `p`.
    pub fn integrate_hit(&mut self, p: &Point3) -> Result<()> {
        self.update_voxel(key_of(p, self.resolution), self.model.hit)
    }

    /// Applies the miss update to the voxel containing `p`.
    pub fn integrate_miss(&mut self, p: &Point3) -> Result<()> {
        self.update_voxel(key_of(p, self.resolution), self.model.miss)
    }

    /// Casts a ray: every voxel on the segment before the endpoint's voxel
    /// gets the miss update, the endpoint's voxel gets the hit update.
    pub fn insert_ray(&mut self, origin: &Point3, endpoint: &Point3) -> Result<()> {
        if !(origin.is_finite() && endpoint.is_finite()) {
            return Err(Error::domain("non-finite ray"));
        }
        if origin == endpoint {
            return Err(Error::domain("zero-length ray"));
        }
        let start = key_of(origin, self.resolution);
        let end = key_of(endpoint, self.resolution);
        self.ensure_contains(start)?;
        self.ensure_contains(end)?;
        let (hit, miss) = (self.model.hit, self.model.miss);
        // The walk stays inside the bounding box of its end voxels.
        for key in VoxelWalk::new(origin, endpoint, self.resolution) {
            self.apply_delta(key, if key == end { hit } else { miss });
        }
        Ok(())
    }

    pub fn query_key(&self, key: VoxelKey) -> Occupancy {
        if !self.contains_key(key) {
            return Occupancy::Unknown;
        }
        let mut node = self.root.as_ref();
        let mut bit = self.depth;
        loop {
            match node {
                None => return Occupancy::Unknown,
                Some(Node::Leaf(v)) => return self.model.classify(*v),
                Some(Node::Inner(children)) => {
                    bit -= 1;
                    node = children[self.child_index(key, bit)].as_ref();
                }
            }
        }
    }

    pub fn query(&self, p: &Point3) -> Occupancy {
        if !p.is_finite() {
            return Occupancy::Unknown;
        }
        self.query_key(key_of(p, self.resolution))
    }

    /// Stored log-odds of the voxel, if known.
    pub fn log_odds_at(&self, key: VoxelKey) -> Option<f32> {
        if !self.contains_key(key) {
            return None;
        }
        let mut node = self.root.as_ref();
        let mut bit = self.depth;
        loop {
            match node? {
                Node::Leaf(v) => return Some(*v),
                Node::Inner(children) => {
                    bit -= 1;
                    node = children[self.child_index(key, bit)].as_ref();
                }
            }
        }
    }

    /// Merges every group of eight identical sibling leaves into their
    /// parent, bottom-up, and drops inner nodes without children.
    pub fn prune(&mut self) {
        fn prune_node(slot: &mut Option<Node>) {
            let Some(Node::Inner(children)) = slot else {
                return;
            };
            children.iter_mut().for_each(prune_node);
            if children.iter().all(Option::is_none) {
                *slot = None;
                return;
            }
            let first = match &children[0] {
                Some(Node::Leaf(v)) => *v,
                _ => return,
            };
            let uniform = children
                .iter()
                .all(|c| matches!(c, Some(Node::Leaf(v)) if v.to_bits() == first.to_bits()));
            if uniform {
                *slot = Some(Node::Leaf(first));
            }
        }
        prune_node(&mut self.root);
    }

    /// Depth-first leaf iterator, children in ascending index order.
    pub fn leaves(&self) -> Leaves<'_> {
        Leaves {
            tree: self,
            stack: self
                .root
                .as_ref()
                .map(|n| vec![(n, self.root_min(), self.root_voxels())])
                .unwrap_or_default(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    /// Every known finest-level voxel inside `range` with its log-odds,
    /// ordered as the leaves are.
    pub fn known_voxels(&self, range: &VoxelRange) -> Vec<(VoxelKey, f32)> {
        let mut out = Vec::new();
        for leaf in self.leaves() {
            let lo = leaf.min_key;
            let x0 = lo[0].max(range.lo[0]);
            let x1 = (lo[0] + leaf.size).min(range.hi[0]);
            let y0 = lo[1].max(range.lo[1]);
            let y1 = (lo[1] + leaf.size).min(range.hi[1]);
            let z0 = lo[2].max(range.lo[2]);
            let z1 = (lo[2] + leaf.size).min(range.hi[2]);
            for x in x0..x1 {
                for y in y0..y1 {
                    for z in z0..z1 {
                        out.push(([x, y, z], leaf.log_odds));
                    }
                }
            }
        }
        out
    }

    /// Bounding box of all leaves, or `None` for an empty tree.
    pub fn known_bounds(&self) -> Option<BoundingBox> {
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for leaf in self.leaves() {
            for a in 0..3 {
                lo[a] = lo[a].min(leaf.min_key[a]);
                hi[a] = hi[a].max(leaf.min_key[a] + leaf.size);
            }
        }
        (lo[0] <= hi[0]).then(|| VoxelRange { lo, hi }.to_box(self.resolution))
    }

    /// Builds a map by casting one ray per point from its sensor origin, or
    /// from `fallback_origin` when the cloud carries none, then prunes.
    pub fn from_pointcloud(
        cloud: &PointCloud,
        resolution: f64,
        params: &OccupancyParams,
        fallback_origin: Option<Point3>,
    ) -> Result<Self> {
        cloud.validate()?;
        let mut tree = OccupancyOctree::new(resolution, params)?;
        let origin_of = |i: usize| -> Result<Point3> {
            match (&cloud.sensor_origins, fallback_origin) {
                (Some(o), _) => Ok(o[i]),
                (None, Some(o)) => Ok(o),
                (None, None) => Err(Error::domain(
                    "point cloud has no sensor origins and no fallback origin was given",
                )),
            }
        };
        if cloud.is_empty() {
            return Ok(tree);
        }
        // Size the root once up front.
        if let Some((lo, hi)) = cloud.bounds() {
            tree.ensure_contains(key_of(&lo, resolution))?;
            tree.ensure_contains(key_of(&hi, resolution))?;
        }
        for (i, p) in cloud.points.iter().enumerate() {
            tree.insert_ray(&origin_of(i)?, p)?;
        }
        tree.prune();
        Ok(tree)
    }
}

pub struct Leaves<'a> {
    tree: &'a OccupancyOctree,
    stack: Vec<(&'a Node, VoxelKey, i64)>,
}

impl Iterator for Leaves<'_> {
    type Item = LeafRecord;

    fn next(&mut self) -> Option<LeafRecord> {
        while let Some((node, min, size)) = self.stack.pop() {
            match node {
                Node::Leaf(v) => {
                    let res = self.tree.resolution;
                    let half = size as f64 / 2.0;
                    return Some(LeafRecord {
                        min_key: min,
                        size,
                        center: Point3::new(
                            (min[0] as f64 + half) * res,
                            (min[1] as f64 + half) * res,
                            (min[2] as f64 + half) * res,
                        ),
                        side: size as f64 * res,
                        log_odds: *v,
                        probability: probability(*v as f64),
                    });
                }
                Node::Inner(children) => {
                    for c in (0..8).rev() {
                        if let Some(child) = &children[c] {
                            self.stack.push((child, child_min(min, size, c), size / 2));
                        }
                    }
                }
            }
        }
        None
    }
}
