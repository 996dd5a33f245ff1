//! Incremental voxel traversal of a segment (Amanatides & Woo).

use super::{key_of, VoxelKey};
use crate::geometry::Point3;

/// Iterator over the voxels a segment passes through, from the voxel of
/// its start point to the voxel of its end point, each visited once.
///
/// Steps are only taken along axes that have not yet reached the end
/// voxel's index, so the walk always terminates exactly on the end voxel
/// after `|Δi| + |Δj| + |Δk|` steps regardless of rounding.
#[derive(Debug, Clone)]
pub struct VoxelWalk {
    current: VoxelKey,
    end: VoxelKey,
    step: [i64; 3],
    t_max: [f64; 3],
    t_delta: [f64; 3],
    done: bool,
}

impl VoxelWalk {
    pub fn new(start: &Point3, end: &Point3, resolution: f64) -> Self {
        let current = key_of(start, resolution);
        let end_key = key_of(end, resolution);
        let o = start.to_array().map(|v| v / resolution);
        let e = end.to_array().map(|v| v / resolution);
        let mut step = [0i64; 3];
        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for a in 0..3 {
            let d = e[a] - o[a];
            if current[a] == end_key[a] || d == 0.0 {
                continue;
            }
            step[a] = if end_key[a] > current[a] { 1 } else { -1 };
            t_delta[a] = 1.0 / d.abs();
            let boundary = if step[a] > 0 {
                current[a] as f64 + 1.0
            } else {
                current[a] as f64
            };
            t_max[a] = ((boundary - o[a]) / d).max(0.0);
        }
        VoxelWalk {
            current,
            end: end_key,
            step,
            t_max,
            t_delta,
            done: false,
        }
    }
}

impl Iterator for VoxelWalk {
    type Item = VoxelKey;

    fn next(&mut self) -> Option<VoxelKey> {
        if self.done {
            return None;
        }
        let out = self.current;
        if self.current == self.end {
            self.done = true;
            return Some(out);
        }
        let mut axis = None;
        for a in 0..3 {
            if self.current[a] == self.end[a] {
                continue;
            }
            if axis.is_none_or(|b: usize| self.t_max[a] < self.t_max[b]) {
                axis = Some(a);
            }
        }
        let a = axis.expect("some axis still differs from the end voxel");
        if self.step[a] == 0 {
            // Start and end voxels differ only by rounding; step directly.
            self.step[a] = (self.end[a] - self.current[a]).signum();
        }
        self.current[a] += self.step[a];
        self.t_max[a] += self.t_delta[a];
        Some(out)
    }
}
