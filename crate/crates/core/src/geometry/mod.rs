//! Point clouds, triangle meshes, deterministic test-surface generators and file I/O.

mod distance;
mod generators;
pub mod io;

use std::collections::HashSet;

use crate::error::{invalid_arg, invalid_input, Result};

pub use distance::{point_triangle_distance_sq, ClosestFeature};
pub use generators::{
    cone_mesh, cube_mesh, generate_cone, generate_cube, generate_ellipsoid, generate_sphere,
    generate_tetrahedron, generate_torus, icosphere, torus_mesh, TetrahedronKind,
};

pub type Point3 = [f64; 3];

/// Relative area threshold below which a triangle counts as degenerate.
const DEGENERATE_AREA_RATIO: f64 = 1e-12;

/// Unordered set of samples on a surface, kept in generator or file order.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
}

impl PointCloud {
    /// Builds a cloud, rejecting non-finite coordinates. Empty clouds are allowed
    /// here; downstream operations reject them.
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if let Some(i) = points
            .iter()
            .position(|p| p.iter().any(|c| !c.is_finite()))
        {
            return Err(invalid_input(format!("point {i} has a non-finite coordinate")));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }

    /// Number of points whose exact coordinates repeat an earlier point.
    pub fn duplicate_count(&self) -> usize {
        let mut seen = HashSet::with_capacity(self.points.len());
        self.points
            .iter()
            .filter(|p| !seen.insert(point_key(p)))
            .count()
    }

    /// Axis-aligned bounding box as (min, max); `None` for an empty cloud.
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        bounds_of(&self.points)
    }
}

pub(crate) fn bounds_of(points: &[Point3]) -> Option<(Point3, Point3)> {
    let first = *points.first()?;
    Some(points.iter().fold((first, first), |(mut lo, mut hi), p| {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
        (lo, hi)
    }))
}

/// Bit-exact hash key for a point; `-0.0` and `0.0` are identified.
pub(crate) fn point_key(p: &Point3) -> [u64; 3] {
    p.map(|c| if c == 0.0 { 0 } else { c.to_bits() })
}

/// Triangle surface `T = (V, E, F)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    faces: Vec<[u32; 3]>,
}

impl TriangleMesh {
    /// Validates index ranges, repeated corners and triangle areas.
    pub fn new(vertices: Vec<Point3>, faces: Vec<[u32; 3]>) -> Result<Self> {
        if let Some(i) = vertices
            .iter()
            .position(|p| p.iter().any(|c| !c.is_finite()))
        {
            return Err(invalid_input(format!("vertex {i} has a non-finite coordinate")));
        }
        let nv = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v as usize >= nv) {
                return Err(invalid_input(format!(
                    "face {fi} references a vertex outside 0..{nv}"
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(invalid_input(format!("face {fi} repeats a vertex")));
            }
        }
        let mesh = Self { vertices, faces };
        for fi in 0..mesh.faces.len() {
            if mesh.is_degenerate(fi) {
                return Err(invalid_input(format!("face {fi} has zero area")));
            }
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn triangle(&self, face: usize) -> [Point3; 3] {
        self.faces[face].map(|v| self.vertices[v as usize])
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.triangle(face);
        0.5 * norm(cross(sub(b, a), sub(c, a)))
    }

    pub fn area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    fn is_degenerate(&self, face: usize) -> bool {
        let [a, b, c] = self.triangle(face);
        let longest = [sub(b, a), sub(c, b), sub(a, c)]
            .iter()
            .map(|e| dot(*e, *e))
            .fold(0.0, f64::max);
        let twice_area = norm(cross(sub(b, a), sub(c, a)));
        !(twice_area > DEGENERATE_AREA_RATIO * longest)
    }

    /// Undirected edges `(lo, hi)` with `lo < hi`, sorted and unique.
    pub fn edges(&self) -> Vec<[u32; 2]> {
        let mut edges: Vec<[u32; 2]> = self
            .faces
            .iter()
            .flat_map(|f| [[f[0], f[1]], [f[1], f[2]], [f[2], f[0]]])
            .map(|[a, b]| if a < b { [a, b] } else { [b, a] })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Number of faces incident to each undirected edge, in `edges()` order.
    pub fn edge_face_counts(&self) -> Vec<([u32; 2], usize)> {
        let mut edges: Vec<[u32; 2]> = self
            .faces
            .iter()
            .flat_map(|f| [[f[0], f[1]], [f[1], f[2]], [f[2], f[0]]])
            .map(|[a, b]| if a < b { [a, b] } else { [b, a] })
            .collect();
        edges.sort_unstable();
        let mut out: Vec<([u32; 2], usize)> = Vec::new();
        for e in edges {
            match out.last_mut() {
                Some((last, count)) if *last == e => *count += 1,
                _ => out.push((e, 1)),
            }
        }
        out
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.faces.len() as i64
    }

    /// Vertices not referenced by any face.
    pub fn unreferenced_vertices(&self) -> Vec<usize> {
        let mut used = vec![false; self.vertices.len()];
        for f in &self.faces {
            for &v in f {
                used[v as usize] = true;
            }
        }
        used.iter()
            .enumerate()
            .filter(|(_, u)| !**u)
            .map(|(i, _)| i)
            .collect()
    }

    /// Point cloud made of the mesh vertex set.
    pub fn vertex_cloud(&self) -> PointCloud {
        PointCloud {
            points: self.vertices.clone(),
        }
    }
}

/// Parametric test surfaces. `density` is the grid resolution `d` for smooth
/// surfaces, points per edge `m` for polyhedra and the cone, and the subdivision
/// level for the icosphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShapeKind {
    Sphere,
    Ellipsoid { a: f64, b: f64, c: f64 },
    Cone { h: f64 },
    Cube,
    Tetrahedron3,
    Tetrahedron4,
    Torus { major: f64, minor: f64 },
    Icosphere,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub density: u32,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, density: u32) -> Result<Self> {
        let spec = Self { kind, density };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ShapeKind::Ellipsoid { a, b, c } => {
                if !(a > 0.0 && b > 0.0 && c > 0.0) || ![a, b, c].iter().all(|v| v.is_finite()) {
                    return Err(invalid_arg("ellipsoid semi-axes must be positive"));
                }
            }
            ShapeKind::Cone { h } => {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(invalid_arg("cone slope h must be positive"));
                }
            }
            ShapeKind::Torus { major, minor } => {
                if !(minor > 0.0 && major > minor && major.is_finite()) {
                    return Err(invalid_arg("torus radii must satisfy R > rho > 0"));
                }
            }
            _ => {}
        }
        let min_density = match self.kind {
            ShapeKind::Sphere | ShapeKind::Ellipsoid { .. } | ShapeKind::Torus { .. } => 1,
            ShapeKind::Icosphere => 0,
            _ => 2,
        };
        if self.density < min_density {
            return Err(invalid_arg(format!(
                "density must be at least {min_density} for {}",
                self.name()
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ShapeKind::Sphere => "sphere",
            ShapeKind::Ellipsoid { .. } => "ellipsoid",
            ShapeKind::Cone { .. } => "cone",
            ShapeKind::Cube => "cube",
            ShapeKind::Tetrahedron3 => "tetrahedron3",
            ShapeKind::Tetrahedron4 => "tetrahedron4",
            ShapeKind::Torus { .. } => "torus",
            ShapeKind::Icosphere => "icosphere",
        }
    }

    /// Human-readable descriptor recorded in result metadata.
    pub fn descriptor(&self) -> String {
        let d = self.density;
        match self.kind {
            ShapeKind::Ellipsoid { a, b, c } => format!("ellipsoid(a={a},b={b},c={c},d={d})"),
            ShapeKind::Cone { h } => format!("cone(h={h},m={d})"),
            ShapeKind::Torus { major, minor } => format!("torus(R={major},rho={minor},d={d})"),
            ShapeKind::Sphere | ShapeKind::Icosphere => format!("{}(d={d})", self.name()),
            _ => format!("{}(m={d})", self.name()),
        }
    }

    pub fn cloud(&self) -> Result<PointCloud> {
        let d = self.density;
        match self.kind {
            ShapeKind::Sphere => generate_sphere(d),
            ShapeKind::Ellipsoid { a, b, c } => generate_ellipsoid(a, b, c, d),
            ShapeKind::Cone { h } => generate_cone(h, d),
            ShapeKind::Cube => generate_cube(d),
            ShapeKind::Tetrahedron3 => Ok(generate_tetrahedron(3, d)?.0),
            ShapeKind::Tetrahedron4 => Ok(generate_tetrahedron(4, d)?.0),
            ShapeKind::Torus { major, minor } => generate_torus(major, minor, d),
            ShapeKind::Icosphere => Ok(icosphere(d)?.vertex_cloud()),
        }
    }

    /// Triangle mesh of the same surface, where the generator provides one.
    pub fn mesh(&self) -> Result<Option<TriangleMesh>> {
        let d = self.density;
        Ok(match self.kind {
            ShapeKind::Cone { h } => Some(cone_mesh(h, d)?),
            ShapeKind::Cube => Some(cube_mesh(d)?),
            ShapeKind::Tetrahedron3 => Some(generate_tetrahedron(3, d)?.1),
            ShapeKind::Tetrahedron4 => Some(generate_tetrahedron(4, d)?.1),
            ShapeKind::Torus { major, minor } => Some(torus_mesh(major, minor, d)?),
            ShapeKind::Icosphere => Some(icosphere(d)?),
            ShapeKind::Sphere | ShapeKind::Ellipsoid { .. } => None,
        })
    }
}

pub(crate) fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_rejects_out_of_range_and_repeated_indices() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!(TriangleMesh::new(v.clone(), vec![[0, 1, 3]]).is_err());
        assert!(TriangleMesh::new(v.clone(), vec![[0, 1, 1]]).is_err());
        assert!(TriangleMesh::new(v, vec![[0, 1, 2]]).is_ok());
    }

    #[test]
    fn collinear_face_is_named_in_the_error() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let err = TriangleMesh::new(v, vec![[0, 1, 3], [0, 1, 2]]).unwrap_err();
        assert!(err.to_string().contains("face 1"), "{err}");
    }

    #[test]
    fn cloud_flags_duplicates_and_rejects_nan() {
        let c = PointCloud::new(vec![[0.0, 0.0, 0.0], [-0.0, 0.0, 0.0], [1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(c.duplicate_count(), 1);
        assert!(PointCloud::new(vec![[f64::NAN, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn shape_spec_validation() {
        assert!(ShapeSpec::new(ShapeKind::Torus { major: 1.0, minor: 1.0 }, 4).is_err());
        assert!(ShapeSpec::new(ShapeKind::Ellipsoid { a: 1.0, b: 0.0, c: 1.0 }, 4).is_err());
        assert!(ShapeSpec::new(ShapeKind::Cone { h: -1.0 }, 4).is_err());
        assert!(ShapeSpec::new(ShapeKind::Cube, 1).is_err());
        assert!(ShapeSpec::new(ShapeKind::Sphere, 0).is_err());
        assert!(ShapeSpec::new(ShapeKind::Sphere, 1).is_ok());
    }
}
