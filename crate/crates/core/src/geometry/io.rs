//! Text formats: xyz and ascii PLY for clouds, OFF and OBJ for meshes.
//!
//! Coordinates are written with 17 significant digits so that save followed by
//! load reproduces every `f64` exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::{Point3, PointCloud, TriangleMesh};
use crate::error::{invalid_arg, invalid_input, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloudFormat {
    Xyz,
    PlyAscii,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl CloudFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match extension(path).as_deref() {
            Some("xyz" | "txt") => Ok(Self::Xyz),
            Some("ply") => Ok(Self::PlyAscii),
            _ => Err(invalid_arg(format!(
                "cannot infer cloud format of {}",
                path.display()
            ))),
        }
    }
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match extension(path).as_deref() {
            Some("off") => Ok(Self::Off),
            Some("obj") => Ok(Self::Obj),
            _ => Err(invalid_arg(format!(
                "cannot infer mesh format of {}",
                path.display()
            ))),
        }
    }
}

impl FromStr for CloudFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xyz" => Ok(Self::Xyz),
            "ply" | "ply-ascii" => Ok(Self::PlyAscii),
            _ => Err(invalid_arg(format!("unknown cloud format '{s}'"))),
        }
    }
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(Self::Off),
            "obj" => Ok(Self::Obj),
            _ => Err(invalid_arg(format!("unknown mesh format '{s}'"))),
        }
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

/// A mesh together with the non-fatal issues met while reading it.
#[derive(Clone, Debug)]
pub struct LoadedMesh {
    pub mesh: TriangleMesh,
    pub warnings: Vec<String>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    token
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("'{token}' is not a number")))
}

fn parse_usize(token: &str, line: usize) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| parse_err(line, format!("'{token}' is not a non-negative integer")))
}

fn parse_point(fields: &[&str], line: usize) -> Result<Point3> {
    let mut p = [0.0; 3];
    for (c, f) in p.iter_mut().zip(fields) {
        *c = parse_f64(f, line)?;
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(parse_err(line, "non-finite coordinate"));
    }
    Ok(p)
}

/// Lines with their 1-based numbers, comments and blank lines removed.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn read_text(path: &Path) -> Result<String> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    Ok(text)
}

pub fn load_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    let text = read_text(path)?;
    match format {
        CloudFormat::Xyz => parse_xyz(&text),
        CloudFormat::PlyAscii => Ok(parse_ply(&text)?.0),
    }
}

pub fn save_cloud(path: &Path, cloud: &PointCloud, format: CloudFormat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        CloudFormat::Xyz => write_xyz(&mut w, cloud.points())?,
        CloudFormat::PlyAscii => write_ply(&mut w, cloud.points(), None)?,
    }
    w.flush()?;
    Ok(())
}

/// One `x y z` triple per line; `#` starts a comment.
pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (line, l) in content_lines(text) {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(
                line,
                format!("expected 3 coordinates, found {}", fields.len()),
            ));
        }
        points.push(parse_point(&fields, line)?);
    }
    if points.is_empty() {
        return Err(invalid_input("point cloud file contains no points"));
    }
    PointCloud::new(points)
}

pub fn write_xyz<W: Write>(w: &mut W, points: &[Point3]) -> Result<()> {
    for [x, y, z] in points {
        writeln!(w, "{x:.16e} {y:.16e} {z:.16e}")?;
    }
    Ok(())
}

/// Parses an ascii PLY file. Returns the vertex positions and, when present,
/// the per-vertex `quality` property. Elements other than `vertex` are skipped.
pub fn parse_ply(text: &str) -> Result<(PointCloud, Option<Vec<f64>>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_err(1, "missing 'ply' magic")),
    }
    // (name, count, property names)
    let mut elements: Vec<(String, usize, Vec<String>)> = Vec::new();
    let mut header_done = false;
    for (line, l) in lines.by_ref() {
        let fields: Vec<&str> = l.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            ["comment" | "obj_info", ..] => {}
            ["format", "ascii", _] => {}
            ["format", other, ..] => {
                return Err(parse_err(line, format!("unsupported PLY format '{other}'")))
            }
            ["element", name, count] => {
                elements.push((name.to_string(), parse_usize(count, line)?, Vec::new()))
            }
            ["property", "list", _, _, name] | ["property", _, name] => match elements.last_mut() {
                Some(e) => e.2.push(name.to_string()),
                None => return Err(parse_err(line, "property before any element")),
            },
            ["end_header"] => {
                header_done = true;
                break;
            }
            _ => return Err(parse_err(line, format!("unrecognised header line '{l}'"))),
        }
    }
    if !header_done {
        return Err(parse_err(text.lines().count(), "missing end_header"));
    }
    let mut points = Vec::new();
    let mut quality = None;
    for (name, count, props) in &elements {
        if name != "vertex" {
            for _ in 0..*count {
                lines
                    .next()
                    .ok_or_else(|| parse_err(text.lines().count(), "truncated element data"))?;
            }
            continue;
        }
        if *count == 0 {
            return Err(invalid_input("PLY file declares no vertices"));
        }
        let col = |p: &str| props.iter().position(|q| q == p);
        let (Some(ix), Some(iy), Some(iz)) = (col("x"), col("y"), col("z")) else {
            return Err(parse_err(1, "vertex element lacks x/y/z properties"));
        };
        let iq = col("quality");
        let mut q = Vec::new();
        for _ in 0..*count {
            let (line, l) = lines
                .next()
                .ok_or_else(|| parse_err(text.lines().count(), "truncated vertex data"))?;
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != props.len() {
                return Err(parse_err(
                    line,
                    format!("expected {} values, found {}", props.len(), fields.len()),
                ));
            }
            points.push(parse_point(&[fields[ix], fields[iy], fields[iz]], line)?);
            if let Some(iq) = iq {
                q.push(parse_f64(fields[iq], line)?);
            }
        }
        if iq.is_some() {
            quality = Some(q);
        }
    }
    if points.is_empty() {
        return Err(invalid_input("PLY file declares no vertices"));
    }
    Ok((PointCloud::new(points)?, quality))
}

/// Writes vertex positions, optionally with a per-vertex `quality` scalar.
pub fn write_ply<W: Write>(w: &mut W, points: &[Point3], quality: Option<&[f64]>) -> Result<()> {
    if let Some(q) = quality {
        if q.len() != points.len() {
            return Err(invalid_arg(format!(
                "{} scalar values for {} vertices",
                q.len(),
                points.len()
            )));
        }
    }
    writeln!(w, "ply\nformat ascii 1.0\nelement vertex {}", points.len())?;
    writeln!(w, "property double x\nproperty double y\nproperty double z")?;
    if quality.is_some() {
        writeln!(w, "property double quality")?;
    }
    writeln!(w, "end_header")?;
    for (i, [x, y, z]) in points.iter().enumerate() {
        match quality {
            Some(q) => writeln!(w, "{x:.16e} {y:.16e} {z:.16e} {:.16e}", q[i])?,
            None => writeln!(w, "{x:.16e} {y:.16e} {z:.16e}")?,
        }
    }
    Ok(())
}

/// Writes a scalar field on points as an ascii PLY file.
pub fn save_scalar_field(path: &Path, points: &[Point3], values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_ply(&mut w, points, Some(values))?;
    w.flush()?;
    Ok(())
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<LoadedMesh> {
    let text = read_text(path)?;
    match format {
        MeshFormat::Off => parse_off(&text),
        MeshFormat::Obj => parse_obj(&text),
    }
}

pub fn save_mesh(path: &Path, mesh: &TriangleMesh, format: MeshFormat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        MeshFormat::Off => write_off(&mut w, mesh)?,
        MeshFormat::Obj => write_obj(&mut w, mesh)?,
    }
    w.flush()?;
    Ok(())
}

/// Splits polygons into triangle fans around their first corner.
struct FaceCollector {
    faces: Vec<[u32; 3]>,
    warnings: Vec<String>,
}

impl FaceCollector {
    fn new() -> Self {
        Self {
            faces: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn push(&mut self, corners: &[u32], line: usize) -> Result<()> {
        if corners.len() < 3 {
            return Err(parse_err(line, "face with fewer than 3 corners"));
        }
        if corners.len() > 3 {
            let msg = format!(
                "line {line}: {}-gon split into {} triangles",
                corners.len(),
                corners.len() - 2
            );
            log::warn!("{msg}");
            self.warnings.push(msg);
        }
        for w in corners[1..].windows(2) {
            self.faces.push([corners[0], w[0], w[1]]);
        }
        Ok(())
    }
}

fn check_index(i: usize, nv: usize, line: usize) -> Result<u32> {
    if i >= nv {
        return Err(parse_err(
            line,
            format!("vertex index {i} out of range for {nv} vertices"),
        ));
    }
    Ok(i as u32)
}

pub fn parse_off(text: &str) -> Result<LoadedMesh> {
    let mut lines = content_lines(text);
    let (line, first) = lines
        .next()
        .ok_or_else(|| invalid_input("mesh file is empty"))?;
    let mut header: Vec<&str> = first.split_whitespace().collect();
    if header.first() != Some(&"OFF") {
        return Err(parse_err(line, "missing 'OFF' header"));
    }
    header.remove(0);
    let (line, counts) = if header.is_empty() {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(line, "missing vertex/face counts"))?;
        (line, l.split_whitespace().collect::<Vec<_>>())
    } else {
        (line, header)
    };
    if counts.len() < 2 {
        return Err(parse_err(line, "expected vertex and face counts"));
    }
    let nv = parse_usize(counts[0], line)?;
    let nf = parse_usize(counts[1], line)?;
    if nv == 0 {
        return Err(invalid_input("mesh file declares no vertices"));
    }
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(text.lines().count(), "truncated vertex list"))?;
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(parse_err(line, "vertex needs 3 coordinates"));
        }
        vertices.push(parse_point(&fields[..3], line)?);
    }
    let mut faces = FaceCollector::new();
    for _ in 0..nf {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(text.lines().count(), "truncated face list"))?;
        let fields: Vec<&str> = l.split_whitespace().collect();
        let k = parse_usize(fields[0], line)?;
        if fields.len() < k + 1 {
            return Err(parse_err(line, format!("face declares {k} corners")));
        }
        let corners = fields[1..=k]
            .iter()
            .map(|f| check_index(parse_usize(f, line)?, nv, line))
            .collect::<Result<Vec<_>>>()?;
        faces.push(&corners, line)?;
    }
    Ok(LoadedMesh {
        mesh: TriangleMesh::new(vertices, faces.faces)?,
        warnings: faces.warnings,
    })
}

pub fn write_off<W: Write>(w: &mut W, mesh: &TriangleMesh) -> Result<()> {
    writeln!(w, "OFF\n{} {} 0", mesh.vertices().len(), mesh.faces().len())?;
    write_xyz(w, mesh.vertices())?;
    for [a, b, c] in mesh.faces() {
        writeln!(w, "3 {a} {b} {c}")?;
    }
    Ok(())
}

/// Reads `v` and `f` records; every other record type is ignored. Face corners
/// may be `i`, `i/t`, `i//n` or `i/t/n`, with negative indices counting back.
pub fn parse_obj(text: &str) -> Result<LoadedMesh> {
    let mut vertices = Vec::new();
    let mut pending: Vec<(usize, Vec<i64>)> = Vec::new();
    for (line, l) in content_lines(text) {
        let mut fields = l.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<&str> = fields.collect();
                if coords.len() < 3 {
                    return Err(parse_err(line, "vertex needs 3 coordinates"));
                }
                vertices.push(parse_point(&coords[..3], line)?);
            }
            Some("f") => {
                let corners = fields
                    .map(|f| {
                        let idx = f.split('/').next().unwrap_or("");
                        idx.parse::<i64>()
                            .map_err(|_| parse_err(line, format!("bad face corner '{f}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                // Relative indices refer to the vertices read so far.
                let resolved = corners
                    .into_iter()
                    .map(|i| if i < 0 { vertices.len() as i64 + i + 1 } else { i })
                    .collect();
                pending.push((line, resolved));
            }
            _ => {}
        }
    }
    if vertices.is_empty() {
        return Err(invalid_input("mesh file contains no vertices"));
    }
    let nv = vertices.len();
    let mut faces = FaceCollector::new();
    for (line, corners) in pending {
        let corners = corners
            .into_iter()
            .map(|i| {
                if i < 1 {
                    Err(parse_err(line, format!("vertex index {i} out of range")))
                } else {
                    check_index(i as usize - 1, nv, line)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        faces.push(&corners, line)?;
    }
    Ok(LoadedMesh {
        mesh: TriangleMesh::new(vertices, faces.faces)?,
        warnings: faces.warnings,
    })
}

pub fn write_obj<W: Write>(w: &mut W, mesh: &TriangleMesh) -> Result<()> {
    for [x, y, z] in mesh.vertices() {
        writeln!(w, "v {x:.16e} {y:.16e} {z:.16e}")?;
    }
    for [a, b, c] in mesh.faces() {
        writeln!(w, "f {} {} {}", a + 1, b + 1, c + 1)?;
    }
    Ok(())
}
