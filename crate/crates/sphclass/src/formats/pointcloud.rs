use std::fmt::Write as _;
use std::path::Path;

use sphclass_core::{Point, PointCloud};

use super::{read_file, write_file_atomic, Reader};
use crate::error::{Error, Result};

pub const POINTS_MAGIC: &[u8; 4] = b"SPC1";

/// Reads a binary (`SPC1`) or text point cloud, chosen by the file's first bytes.
pub fn read_point_cloud(path: &Path) -> Result<PointCloud> {
    let bytes = read_file(path)?;
    let points = if bytes.starts_with(POINTS_MAGIC) {
        let mut r = Reader::new(&bytes, path);
        r.magic(POINTS_MAGIC)?;
        let count = r.u32()? as usize;
        let mut pts = Vec::with_capacity(count.min(bytes.len() / 12));
        for _ in 0..count {
            pts.push([r.f32()? as f64, r.f32()? as f64, r.f32()? as f64]);
        }
        r.finish()?;
        pts
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|_| Error::format(path, "neither SPC1 nor UTF-8 text"))?;
        parse_point_text(text).map_err(|m| Error::format(path, m))?
    };
    if let Some(p) = points.iter().find(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::format(path, format!("non-finite coordinate {p:?}")));
    }
    PointCloud::new(points).map_err(|_| Error::format(path, "no points"))
}

pub fn parse_point_text(text: &str) -> Result<Vec<Point>, String> {
    let mut pts = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let vals: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if vals.len() != 3 {
            return Err(format!("line {}: expected 3 coordinates, found {}", n + 1, vals.len()));
        }
        let mut p = [0.0; 3];
        for (dst, v) in p.iter_mut().zip(vals) {
            *dst = v.parse().map_err(|_| format!("line {}: bad number {v:?}", n + 1))?;
        }
        pts.push(p);
    }
    Ok(pts)
}

/// Binary, `f32` coordinates.
pub fn write_point_cloud_binary(path: &Path, pc: &PointCloud) -> Result<()> {
    let mut out = Vec::with_capacity(8 + 12 * pc.len());
    out.extend_from_slice(POINTS_MAGIC);
    out.extend_from_slice(&(pc.len() as u32).to_le_bytes());
    for p in pc.points() {
        for v in p {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    write_file_atomic(path, &out)
}

/// Text with shortest round-trip formatting, so `f64` values survive exactly.
pub fn write_point_cloud_text(path: &Path, pc: &PointCloud) -> Result<()> {
    let mut s = String::with_capacity(pc.len() * 64);
    for p in pc.points() {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
    }
    write_file_atomic(path, s.as_bytes())
}

/// `.bin` paths get the binary format, everything else text.
pub fn write_point_cloud(path: &Path, pc: &PointCloud) -> Result<()> {
    if path.extension().is_some_and(|e| e == "bin") {
        write_point_cloud_binary(path, pc)
    } else {
        write_point_cloud_text(path, pc)
    }
}
