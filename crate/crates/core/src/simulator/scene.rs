//! Scenes made of axis-aligned boxes and infinite planes.
//!
//! Scene file, one primitive per line, `#` starts a comment:
//!
//! ```text
//! box   cx cy cz sx sy sz     # center and full side lengths
//! plane nx ny nz d            # points with n·x = d, n need not be unit
//! bounds x0 y0 z0 x1 y1 z1    # optional world box
//! ```
//!
//! Boxes are hollow: only their six faces are surfaces, so a ray starting
//! inside a box hits its walls. Without a `bounds` line the world box is the
//! union of all boxes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::scanlog::read_text;
use crate::geometry::Point3;
use crate::octree::BoundingBox;

/// Distances below this count as "at the origin" and are not hits.
const HIT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Box { min: Point3, max: Point3 },
    /// `normal · x = offset`, with a unit normal.
    Plane { normal: Point3, offset: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub id: usize,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    primitives: Vec<Primitive>,
    bounds: BoundingBox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub distance: f64,
    pub primitive: usize,
}

impl Shape {
    pub fn aabb(center: Point3, size: Point3) -> Result<Shape> {
        if !(center.is_finite() && size.is_finite()) || size.x <= 0.0 || size.y <= 0.0 || size.z <= 0.0 {
            return Err(Error::domain(format!("degenerate box of size {size:?}")));
        }
        let half = size * 0.5;
        Ok(Shape::Box {
            min: center - half,
            max: center + half,
        })
    }

    pub fn plane(normal: Point3, offset: f64) -> Result<Shape> {
        let n = normal.norm();
        if !(n.is_finite() && n > 0.0 && offset.is_finite()) {
            return Err(Error::domain("plane needs a non-zero finite normal"));
        }
        Ok(Shape::Plane {
            normal: normal * (1.0 / n),
            offset: offset / n,
        })
    }

    /// Nearest intersection distance along a unit direction, if positive.
    pub fn intersect(&self, origin: &Point3, dir: &Point3) -> Option<f64> {
        match self {
            Shape::Plane { normal, offset } => {
                let denom = normal.dot(dir);
                if denom.abs() < 1e-15 {
                    return None;
                }
                let t = (offset - normal.dot(origin)) / denom;
                (t > HIT_EPS).then_some(t)
            }
            Shape::Box { min, max } => {
                let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
                for a in 0..3 {
                    let (o, d) = (origin.to_array()[a], dir.to_array()[a]);
                    let (lo, hi) = (min.to_array()[a], max.to_array()[a]);
                    if d == 0.0 {
                        if o < lo || o > hi {
                            return None;
                        }
                        continue;
                    }
                    let (ta, tb) = ((lo - o) / d, (hi - o) / d);
                    t0 = t0.max(ta.min(tb));
                    t1 = t1.min(ta.max(tb));
                }
                if t0 > t1 {
                    None
                } else if t0 > HIT_EPS {
                    Some(t0)
                } else if t1 > HIT_EPS {
                    Some(t1)
                } else {
                    None
                }
            }
        }
    }

    /// Distance from `p` to the surface.
    pub fn surface_distance(&self, p: &Point3) -> f64 {
        match self {
            Shape::Plane { normal, offset } => (normal.dot(p) - offset).abs(),
            Shape::Box { min, max } => {
                let (p, lo, hi) = (p.to_array(), min.to_array(), max.to_array());
                let inside = (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a]);
                if inside {
                    (0..3)
                        .map(|a| (p[a] - lo[a]).min(hi[a] - p[a]))
                        .fold(f64::INFINITY, f64::min)
                } else {
                    (0..3)
                        .map(|a| (lo[a] - p[a]).max(p[a] - hi[a]).max(0.0).powi(2))
                        .sum::<f64>()
                        .sqrt()
                }
            }
        }
    }

    /// Whether the closed cube `[lo, hi]` touches the surface.
    pub fn touches_cube(&self, lo: &Point3, hi: &Point3) -> bool {
        match self {
            Shape::Plane { normal, offset } => {
                let (n, l, h) = (normal.to_array(), lo.to_array(), hi.to_array());
                let (mut a, mut b) = (0.0, 0.0);
                for i in 0..3 {
                    let (u, v) = (n[i] * l[i], n[i] * h[i]);
                    a += u.min(v);
                    b += u.max(v);
                }
                a <= *offset && *offset <= b
            }
            Shape::Box { min, max } => {
                let (l, h, bmin, bmax) = (lo.to_array(), hi.to_array(), min.to_array(), max.to_array());
                let overlaps = (0..3).all(|a| l[a] <= bmax[a] && h[a] >= bmin[a]);
                let strictly_inside = (0..3).all(|a| l[a] > bmin[a] && h[a] < bmax[a]);
                overlaps && !strictly_inside
            }
        }
    }
}

impl Scene {
    pub fn new(shapes: Vec<Shape>, bounds: Option<BoundingBox>) -> Result<Scene> {
        if shapes.is_empty() {
            return Err(Error::domain("scene has no primitives"));
        }
        let bounds = match bounds {
            Some(b) => b,
            None => shapes
                .iter()
                .filter_map(|s| match s {
                    Shape::Box { min, max } => Some(BoundingBox { min: *min, max: *max }),
                    Shape::Plane { .. } => None,
                })
                .reduce(|a, b| a.union(&b))
                .ok_or_else(|| Error::domain("a scene of planes only needs a bounds line"))?,
        };
        let primitives = shapes
            .into_iter()
            .enumerate()
            .map(|(id, shape)| Primitive { id, shape })
            .collect();
        Ok(Scene { primitives, bounds })
    }

    /// Closed room: the inside faces of a box.
    pub fn room(min: Point3, max: Point3) -> Result<Scene> {
        let b = BoundingBox::new(min, max)?;
        Scene::new(vec![Shape::Box { min, max }], Some(b))
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn bounds(&self) -> &BoundingBox {
        &self.bounds
    }

    pub fn surface_distance(&self, p: &Point3) -> f64 {
        self.primitives
            .iter()
            .map(|pr| pr.shape.surface_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: &Point3) -> bool {
        let (b, p) = (&self.bounds, p);
        p.x >= b.min.x && p.x <= b.max.x && p.y >= b.min.y && p.y <= b.max.y && p.z >= b.min.z && p.z <= b.max.z
    }
}

/// Nearest positive hit along a unit direction.
pub fn raycast(scene: &Scene, origin: &Point3, direction: &Point3) -> Result<Option<Hit>> {
    if !(origin.is_finite() && direction.is_finite()) {
        return Err(Error::domain("non-finite ray"));
    }
    if (direction.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "ray direction must be a unit vector, |d| = {}",
            direction.norm()
        )));
    }
    let mut best: Option<Hit> = None;
    for p in &scene.primitives {
        if let Some(t) = p.shape.intersect(origin, direction) {
            if best.is_none_or(|b| t < b.distance) {
                best = Some(Hit {
                    distance: t,
                    primitive: p.id,
                });
            }
        }
    }
    Ok(best)
}

pub fn parse_scene(text: &str, name: &str) -> Result<Scene> {
    let mut shapes = Vec::new();
    let mut bounds = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: name.to_string(),
            line: idx + 1,
            msg,
        };
        let mut toks = line.split_whitespace();
        let kind = toks.next().unwrap_or_default();
        let nums = toks
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| err("bad number".into()))?;
        let want = match kind {
            "box" | "bounds" => 6,
            "plane" => 4,
            other => return Err(err(format!("unknown record {other:?}"))),
        };
        if nums.len() != want {
            return Err(err(format!("{kind} takes {want} numbers, found {}", nums.len())));
        }
        let p = |i: usize| Point3::new(nums[i], nums[i + 1], nums[i + 2]);
        let built = match kind {
            "box" => Shape::aabb(p(0), p(3)).map(|s| shapes.push(s)),
            "plane" => Shape::plane(p(0), nums[3]).map(|s| shapes.push(s)),
            _ => BoundingBox::new(p(0), p(3)).map(|b| bounds = Some(b)),
        };
        built.map_err(|e| err(e.to_string()))?;
    }
    Scene::new(shapes, bounds).map_err(|e| Error::Parse {
        path: name.to_string(),
        line: 0,
        msg: e.to_string(),
    })
}

pub fn read_scene(path: &Path) -> Result<Scene> {
    parse_scene(&read_text(path)?, &path.display().to_string())
}

pub fn format_scene(scene: &Scene) -> String {
    let mut out = String::new();
    for p in &scene.primitives {
        match p.shape {
            Shape::Box { min, max } => {
                let c = (min + max) * 0.5;
                let s = max - min;
                let _ = writeln!(out, "box {} {} {} {} {} {}", c.x, c.y, c.z, s.x, s.y, s.z);
            }
            Shape::Plane { normal: n, offset } => {
                let _ = writeln!(out, "plane {} {} {} {}", n.x, n.y, n.z, offset);
            }
        }
    }
    let b = scene.bounds;
    let _ = writeln!(
        out,
        "bounds {} {} {} {} {} {}",
        b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z
    );
    out
}
