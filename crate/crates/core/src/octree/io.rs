//! Binary octree files and the ASCII leaf dump.
//!
//! Binary layout, little-endian:
//!
//! ```text
//! magic        5 bytes  "OCTQ1"
//! resolution   f64
//! root center  3 x f64  (always the origin)
//! half size    f64      resolution * 2^(depth-1)
//! hit, miss    2 x f32  log-odds updates
//! clamp        2 x f32  log-odds lower/upper bound
//! threshold    f64      occupancy probability threshold
//! root code    u8       0 = empty, 1 = leaf, 2 = inner
//! nodes        depth-first from the root:
//!                leaf  -> f32 log-odds
//!                inner -> u16 child codes (2 bits per child, child i at
//!                         bits 2i..2i+1, same codes as the root), then the
//!                         payload of each present child in index order
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{Node, OccupancyOctree, UpdateModel};
use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::geometry::Point3;

pub const MAGIC: &[u8; 5] = b"OCTQ1";

const CODE_NONE: u8 = 0;
const CODE_LEAF: u8 = 1;
const CODE_INNER: u8 = 2;

fn code(node: Option<&Node>) -> u8 {
    match node {
        None => CODE_NONE,
        Some(Node::Leaf(_)) => CODE_LEAF,
        Some(Node::Inner(_)) => CODE_INNER,
    }
}

fn write_node(node: &Node, out: &mut Vec<u8>) {
    match node {
        Node::Leaf(v) => out.extend_from_slice(&v.to_le_bytes()),
        Node::Inner(children) => {
            let mask = children
                .iter()
                .enumerate()
                .fold(0u16, |m, (i, c)| m | (u16::from(code(c.as_ref())) << (2 * i)));
            out.extend_from_slice(&mask.to_le_bytes());
            for child in children.iter().flatten() {
                write_node(child, out);
            }
        }
    }
}

impl OccupancyOctree {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + self.leaf_count() * 6);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.resolution().to_le_bytes());
        for _ in 0..3 {
            out.extend_from_slice(&0.0f64.to_le_bytes());
        }
        out.extend_from_slice(&self.half_size().to_le_bytes());
        let m = self.model();
        for v in [m.hit, m.miss, m.clamp_min, m.clamp_max] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&m.occupancy_threshold.to_le_bytes());
        let root = self.root_node();
        out.push(code(root));
        if let Some(root) = root {
            write_node(root, &mut out);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(5)? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let resolution = r.f64()?;
        let center = [r.f64()?, r.f64()?, r.f64()?];
        if center != [0.0; 3] {
            return Err(Error::Format(format!("root center {center:?} is not the origin")));
        }
        let half_size = r.f64()?;
        let model = UpdateModel {
            hit: r.f32()?,
            miss: r.f32()?,
            clamp_min: r.f32()?,
            clamp_max: r.f32()?,
            occupancy_threshold: r.f64()?,
        };
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::Format(format!("bad resolution {resolution}")));
        }
        let depth = (1..=super::MAX_DEPTH)
            .find(|&d| resolution * (1u64 << (d - 1)) as f64 == half_size)
            .ok_or_else(|| Error::Format(format!("half size {half_size} is not resolution * 2^k")))?;
        let root_code = r.u8()?;
        let root = r.node(root_code, depth, &model)?;
        if r.pos != bytes.len() {
            return Err(Error::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        OccupancyOctree::from_parts(resolution, depth, root, model).map_err(|e| match e {
            Error::Parameter(msg) => Error::Format(msg),
            other => other,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Format("unexpected end of data".into()));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Reads the payload for a node of the given code with `levels` levels
    /// remaining below it.
    fn node(&mut self, code: u8, levels: u32, model: &UpdateModel) -> Result<Option<Node>> {
        match code {
            CODE_NONE => Ok(None),
            CODE_LEAF => {
                let v = self.f32()?;
                if !(v.is_finite() && v >= model.clamp_min && v <= model.clamp_max) {
                    return Err(Error::Format(format!("leaf log-odds {v} outside clamping bounds")));
                }
                Ok(Some(Node::Leaf(v)))
            }
            CODE_INNER => {
                if levels == 0 {
                    return Err(Error::Format("inner node below the finest level".into()));
                }
                let mask = self.u16()?;
                let mut children: [Option<Node>; 8] = std::array::from_fn(|_| None);
                for (i, child) in children.iter_mut().enumerate() {
                    let c = ((mask >> (2 * i)) & 3) as u8;
                    *child = self.node(c, levels - 1, model)?;
                }
                Ok(Some(Node::Inner(Box::new(children))))
            }
            other => Err(Error::Format(format!("bad node code {other}"))),
        }
    }
}

pub fn write_octree(path: &Path, tree: &OccupancyOctree) -> Result<()> {
    std::fs::write(path, tree.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_octree(path: &Path) -> Result<OccupancyOctree> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    OccupancyOctree::from_bytes(&bytes)
}

/// One leaf per line: `cx cy cz side probability log_odds`.
pub fn dump_ascii(tree: &OccupancyOctree) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# resolution {} depth {} leaves {}",
        sig9(tree.resolution()),
        tree.depth(),
        tree.leaf_count()
    );
    let _ = writeln!(out, "# cx cy cz side probability log_odds");
    for leaf in tree.leaves() {
        let Point3 { x, y, z } = leaf.center;
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            sig9(x),
            sig9(y),
            sig9(z),
            sig9(leaf.side),
            sig9(leaf.probability),
            sig9(leaf.log_odds as f64)
        );
    }
    out
}
