//! ASCII point-cloud files: a header line `n_points has_origins` followed by
//! `x y z [ox oy oz]` per point, nine significant digits per value.

use std::fmt::Write as _;
use std::path::Path;

use super::PointCloud;
use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::geometry::scanlog::parse_columns;
use crate::geometry::Point3;

pub fn format_pointcloud(cloud: &PointCloud) -> String {
    let has_origins = cloud.sensor_origins.is_some();
    let mut out = String::with_capacity(cloud.len() * 40 + 16);
    let _ = writeln!(out, "{} {}", cloud.len(), u8::from(has_origins));
    for (i, p) in cloud.points.iter().enumerate() {
        let _ = write!(out, "{} {} {}", sig9(p.x), sig9(p.y), sig9(p.z));
        if let Some(origins) = &cloud.sensor_origins {
            let o = origins[i];
            let _ = write!(out, " {} {} {}", sig9(o.x), sig9(o.y), sig9(o.z));
        }
        out.push('\n');
    }
    out
}

pub fn parse_pointcloud(text: &str, name: &str) -> Result<PointCloud> {
    let err = |line: usize, msg: String| Error::Parse {
        path: name.to_string(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| err(1, "missing header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (n, has_origins) = match fields.as_slice() {
        [n, flag] => {
            let n: usize = n
                .parse()
                .map_err(|_| err(hline + 1, format!("bad point count {n:?}")))?;
            let flag = match *flag {
                "0" => false,
                "1" => true,
                other => return Err(err(hline + 1, format!("bad origin flag {other:?}"))),
            };
            (n, flag)
        }
        _ => return Err(err(hline + 1, "header must be `n_points has_origins`".into())),
    };

    let body: String = lines.map(|(_, l)| l).collect::<Vec<_>>().join("\n");
    let ncols = if has_origins { 6 } else { 3 };
    let rows = parse_columns(&body, name, ncols).map_err(|e| match e {
        Error::Parse { path, line, msg } => Error::Parse {
            path,
            line: line + hline + 1,
            msg,
        },
        other => other,
    })?;
    if rows.len() != n {
        return Err(err(hline + 1, format!("header announces {n} points, found {}", rows.len())));
    }
    let points = rows.iter().map(|(_, v)| Point3::new(v[0], v[1], v[2])).collect();
    let sensor_origins =
        has_origins.then(|| rows.iter().map(|(_, v)| Point3::new(v[3], v[4], v[5])).collect());
    Ok(PointCloud {
        points,
        frame_id: "map".to_string(),
        sensor_origins,
    })
}

pub fn read_pointcloud(path: &Path) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pointcloud(&text, &path.display().to_string())
}

pub fn write_pointcloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    std::fs::write(path, format_pointcloud(cloud)).map_err(|e| Error::io(path, e))
}
