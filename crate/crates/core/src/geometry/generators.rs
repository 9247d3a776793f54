//! Deterministic samplers for the test surfaces.
//!
//! Every generator is a pure function of its arguments. Points that several
//! faces share are produced from one integer key so deduplication is exact.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::f64::consts::{PI, TAU};

use super::{cross, dot, point_key, sub, Point3, PointCloud, TriangleMesh};
use crate::error::{invalid_arg, Result};

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(cos, sin)` of `2π·num/den`. The angle is split into whole quarter turns,
/// applied exactly, and a remainder in `[0, π/2)` evaluated from its reduced
/// fraction. Equal angles therefore give identical bits, and angles a quarter
/// turn apart give exact rotations of each other.
pub(crate) fn circle_point(num: u64, den: u64) -> (f64, f64) {
    let num = num % den;
    let quadrant = 4 * num / den;
    let (p, q) = (4 * num - quadrant * den, 4 * den);
    let (c, s) = if p == 0 {
        (1.0, 0.0)
    } else {
        let g = gcd(p, q);
        let a = TAU * (p / g) as f64 / (q / g) as f64;
        (a.cos(), a.sin())
    };
    match quadrant {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

/// Shifted-latitude grid on the unit sphere: `d·d` points, no pole duplicates.
pub fn generate_sphere(d: u32) -> Result<PointCloud> {
    if d == 0 {
        return Err(invalid_arg("sphere density d must be at least 1"));
    }
    let d64 = d as u64;
    let mut points = Vec::with_capacity((d64 * d64) as usize);
    for i in 0..d64 {
        let (cu, su) = circle_point(i, d64);
        for j in 0..d {
            let v = PI * (j as f64 + 0.5) / d as f64;
            let (sv, cv) = v.sin_cos();
            points.push([sv * cu, sv * su, cv]);
        }
    }
    PointCloud::new(points)
}

/// Sphere grid scaled by the semi-axes `(a, b, c)`.
pub fn generate_ellipsoid(a: f64, b: f64, c: f64, d: u32) -> Result<PointCloud> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(invalid_arg("ellipsoid semi-axes must be positive"));
    }
    let sphere = generate_sphere(d)?;
    PointCloud::new(
        sphere
            .into_points()
            .into_iter()
            .map(|[x, y, z]| [a * x, b * y, c * z])
            .collect(),
    )
}

/// Torus grid with `u_i = 2πi/d`, `v_j = 2πj/d` (no latitude offset since the
/// torus has no poles, so `d = 1` gives the single point `(R + ρ, 0, 0)`).
pub fn generate_torus(major: f64, minor: f64, d: u32) -> Result<PointCloud> {
    check_torus(major, minor, d)?;
    let d64 = d as u64;
    let mut points = Vec::with_capacity((d64 * d64) as usize);
    for i in 0..d64 {
        let (cu, su) = circle_point(i, d64);
        for j in 0..d64 {
            let (cv, sv) = circle_point(j, d64);
            let ring = major + minor * cv;
            points.push([ring * cu, ring * su, minor * sv]);
        }
    }
    PointCloud::new(points)
}

fn check_torus(major: f64, minor: f64, d: u32) -> Result<()> {
    if !(minor > 0.0 && major > minor) {
        return Err(invalid_arg("torus radii must satisfy R > rho > 0"));
    }
    if d == 0 {
        return Err(invalid_arg("torus density d must be at least 1"));
    }
    Ok(())
}

/// Torus surface mesh on the same `d×d` periodic grid as [`generate_torus`].
pub fn torus_mesh(major: f64, minor: f64, d: u32) -> Result<TriangleMesh> {
    check_torus(major, minor, d)?;
    if d < 3 {
        return Err(invalid_arg("torus mesh needs d >= 3"));
    }
    let vertices = generate_torus(major, minor, d)?.into_points();
    let d = d as u32;
    let id = |i: u32, j: u32| (i % d) * d + (j % d);
    let mut faces = Vec::with_capacity(2 * (d * d) as usize);
    for i in 0..d {
        for j in 0..d {
            let (a, b, c, e) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, e]);
        }
    }
    TriangleMesh::new(vertices, faces)
}

/// Cone `(t cos θ, t sin θ, h t)` with apex at the origin and a flat cap of
/// radius 1 at `z = h`.
///
/// The lateral surface is an `m × 4m` grid in `(t, θ)` with `t = i/(m−1)`; the cap
/// carries its centre plus rings `j = 1..m−1` at radius `j/(m−1)` with `8j`
/// points each. The apex and points on the shared rim are kept once.
pub fn generate_cone(h: f64, m: u32) -> Result<PointCloud> {
    check_cone(h, m)?;
    let m64 = m as u64;
    let span = (m - 1) as f64;
    let sectors = 4 * m64;
    let mut seen = HashSet::new();
    let mut points = Vec::new();
    let mut push = |p: Point3, points: &mut Vec<Point3>| {
        if seen.insert(point_key(&p)) {
            points.push(p);
        }
    };
    for i in 0..m64 {
        let t = i as f64 / span;
        for l in 0..sectors {
            let (c, s) = circle_point(l, sectors);
            push([t * c, t * s, h * t], &mut points);
        }
    }
    push([0.0, 0.0, h], &mut points);
    for j in 1..m64 {
        let radius = j as f64 / span;
        let count = 8 * j;
        for l in 0..count {
            let (c, s) = circle_point(l, count);
            push([radius * c, radius * s, h], &mut points);
        }
    }
    PointCloud::new(points)
}

fn check_cone(h: f64, m: u32) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid_arg("cone slope h must be positive"));
    }
    if m < 2 {
        return Err(invalid_arg("cone needs at least 2 points per edge"));
    }
    Ok(())
}

/// Mesh of the closed cone on a polar grid with `4m` sectors: lateral rows at
/// `t = i/(m−1)` fanned from the apex and cap rings at radius `j/(m−1)` fanned
/// from the cap centre, sharing the rim row.
pub fn cone_mesh(h: f64, m: u32) -> Result<TriangleMesh> {
    check_cone(h, m)?;
    let sectors = 4 * m as u64;
    let span = (m - 1) as f64;
    let mut vertices: Vec<Point3> = vec![[0.0, 0.0, 0.0]];
    // Row 0 is the apex; rows 1..m-1 are lateral rings, the last one being the rim.
    let mut rows: Vec<Vec<u32>> = vec![vec![0]];
    let ring = |vertices: &mut Vec<Point3>, radius: f64, z: f64| -> Vec<u32> {
        (0..sectors)
            .map(|l| {
                let (c, s) = circle_point(l, sectors);
                vertices.push([radius * c, radius * s, z]);
                (vertices.len() - 1) as u32
            })
            .collect()
    };
    for i in 1..m {
        let t = i as f64 / span;
        let r = ring(&mut vertices, t, h * t);
        rows.push(r);
    }
    // Cap rings from the rim inwards, then the centre.
    for j in (1..m - 1).rev() {
        let r = ring(&mut vertices, j as f64 / span, h);
        rows.push(r);
    }
    vertices.push([0.0, 0.0, h]);
    rows.push(vec![(vertices.len() - 1) as u32]);

    let mut faces = Vec::new();
    for pair in rows.windows(2) {
        stitch_rows(&pair[0], &pair[1], &mut faces);
    }
    orient_outward(&vertices, &mut faces, [0.0, 0.0, 0.5 * h]);
    TriangleMesh::new(vertices, faces)
}

/// Triangulates the band between two rings with equal sector count (or a
/// single-point fan on either side).
fn stitch_rows(a: &[u32], b: &[u32], faces: &mut Vec<[u32; 3]>) {
    let n = a.len().max(b.len());
    for l in 0..n {
        let l1 = (l + 1) % n;
        match (a.len(), b.len()) {
            (1, _) => faces.push([a[0], b[l], b[l1]]),
            (_, 1) => faces.push([a[l], a[l1], b[0]]),
            _ => {
                faces.push([a[l], b[l], b[l1]]);
                faces.push([a[l], b[l1], a[l1]]);
            }
        }
    }
}

/// Flips faces whose normal points towards `interior`.
fn orient_outward(vertices: &[Point3], faces: &mut [[u32; 3]], interior: Point3) {
    for f in faces.iter_mut() {
        let [a, b, c] = f.map(|v| vertices[v as usize]);
        let centroid = [
            (a[0] + b[0] + c[0]) / 3.0,
            (a[1] + b[1] + c[1]) / 3.0,
            (a[2] + b[2] + c[2]) / 3.0,
        ];
        let normal = cross(sub(b, a), sub(c, a));
        if dot(normal, sub(centroid, interior)) < 0.0 {
            f.swap(1, 2);
        }
    }
}

/// Integer surface sites of the `m×m×m` cube grid, in lexicographic order.
fn cube_sites(m: u32) -> Vec<[u32; 3]> {
    let last = m - 1;
    let mut sites = Vec::new();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                if [a, b, c].iter().any(|&x| x == 0 || x == last) {
                    sites.push([a, b, c]);
                }
            }
        }
    }
    sites
}

fn cube_coord(a: u32, m: u32) -> f64 {
    -1.0 + 2.0 * a as f64 / (m - 1) as f64
}

/// Surface of `[−1, 1]³` with an `m×m` grid on each face; `6m² − 12m + 8` points.
pub fn generate_cube(m: u32) -> Result<PointCloud> {
    if m < 2 {
        return Err(invalid_arg("cube needs at least 2 points per edge"));
    }
    PointCloud::new(
        cube_sites(m)
            .into_iter()
            .map(|s| s.map(|a| cube_coord(a, m)))
            .collect(),
    )
}

/// Cube surface mesh on the same sites as [`generate_cube`].
pub fn cube_mesh(m: u32) -> Result<TriangleMesh> {
    if m < 2 {
        return Err(invalid_arg("cube needs at least 2 points per edge"));
    }
    let sites = cube_sites(m);
    let index: HashMap<[u32; 3], u32> = sites
        .iter()
        .enumerate()
        .map(|(i, s)| (*s, i as u32))
        .collect();
    let last = m - 1;
    let mut faces = Vec::new();
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [0, last] {
            for i in 0..last {
                for j in 0..last {
                    let site = |di: u32, dj: u32| {
                        let mut s = [0u32; 3];
                        s[axis] = side;
                        s[u] = i + di;
                        s[v] = j + dj;
                        index[&s]
                    };
                    let (a, b, c, d) = (site(0, 0), site(1, 0), site(1, 1), site(0, 1));
                    faces.push([a, b, c]);
                    faces.push([a, c, d]);
                }
            }
        }
    }
    let vertices: Vec<Point3> = sites.iter().map(|s| s.map(|a| cube_coord(a, m))).collect();
    orient_outward(&vertices, &mut faces, [0.0; 3]);
    TriangleMesh::new(vertices, faces)
}

/// The two tetrahedral solids.
///
/// `Regular` has four unit-edge equilateral faces. `Trirectangular` has three
/// right-isosceles lateral faces with unit legs meeting at the apex, closed by
/// an equilateral base of edge `√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TetrahedronKind {
    Trirectangular,
    Regular,
}

impl TetrahedronKind {
    fn corners(self) -> [Point3; 4] {
        match self {
            TetrahedronKind::Regular => [
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.5, 3f64.sqrt() / 2.0, 0.0],
                [0.5, 3f64.sqrt() / 6.0, (2.0f64 / 3.0).sqrt()],
            ],
            TetrahedronKind::Trirectangular => [
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ],
        }
    }
}

/// Tetrahedron with every face subdivided into `m` points per edge. `sides = 3`
/// selects the trirectangular solid (three lateral faces over a base),
/// `sides = 4` the regular one. The cloud is the mesh vertex set.
pub fn generate_tetrahedron(sides: u32, m: u32) -> Result<(PointCloud, TriangleMesh)> {
    let kind = match sides {
        3 => TetrahedronKind::Trirectangular,
        4 => TetrahedronKind::Regular,
        _ => return Err(invalid_arg(format!("tetrahedron sides must be 3 or 4, got {sides}"))),
    };
    if m < 2 {
        return Err(invalid_arg("tetrahedron needs at least 2 points per edge"));
    }
    let corners = kind.corners();
    let steps = m - 1;
    // A site is keyed by its barycentric counts over the global corners.
    let mut index: BTreeMap<[u32; 4], u32> = BTreeMap::new();
    let mut vertices: Vec<Point3> = Vec::new();
    let mut site = |counts: [u32; 4], vertices: &mut Vec<Point3>| -> u32 {
        *index.entry(counts).or_insert_with(|| {
            let mut p = [0.0; 3];
            for (corner, &count) in corners.iter().zip(&counts) {
                if count > 0 {
                    let w = count as f64 / steps as f64;
                    for a in 0..3 {
                        p[a] += w * corner[a];
                    }
                }
            }
            vertices.push(p);
            (vertices.len() - 1) as u32
        })
    };
    let mut faces = Vec::new();
    for tri in [[0usize, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
        let key = |i: u32, j: u32| {
            let mut counts = [0u32; 4];
            counts[tri[0]] = steps - i - j;
            counts[tri[1]] = i;
            counts[tri[2]] = j;
            counts
        };
        for i in 0..steps {
            for j in 0..(steps - i) {
                let a = site(key(i, j), &mut vertices);
                let b = site(key(i + 1, j), &mut vertices);
                let c = site(key(i, j + 1), &mut vertices);
                faces.push([a, b, c]);
                if i + j + 1 < steps {
                    let d = site(key(i + 1, j + 1), &mut vertices);
                    faces.push([b, d, c]);
                }
            }
        }
    }
    let centroid = std::array::from_fn(|a| corners.iter().map(|c| c[a]).sum::<f64>() / 4.0);
    orient_outward(&vertices, &mut faces, centroid);
    let mesh = TriangleMesh::new(vertices, faces)?;
    Ok((mesh.vertex_cloud(), mesh))
}

/// Unit icosphere: the icosahedron subdivided `level` times, projected onto the
/// sphere. Has `10·4^level + 2` vertices.
pub fn icosphere(level: u32) -> Result<TriangleMesh> {
    if level > 9 {
        return Err(invalid_arg("icosphere level above 9 is not supported"));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Point3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalize)
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, vertices: &mut Vec<Point3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[key.0 as usize], vertices[key.1 as usize]);
                vertices.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                (vertices.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriangleMesh::new(vertices, faces)
}

fn normalize(p: Point3) -> Point3 {
    let len = dot(p, p).sqrt();
    [p[0] / len, p[1] / len, p[2] / len]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone_count(m: u64) -> usize {
        let lateral = 1 + (m - 1) * 4 * m;
        let cap = 1 + 4 * m * (m - 1);
        (lateral + cap - gcd(4 * m, 8 * (m - 1))) as usize
    }

    #[test]
    fn circle_point_is_exact_under_quarter_turns() {
        for den in [4u64, 8, 12, 100] {
            for num in 0..den {
                let (c, s) = circle_point(num, den);
                let (c2, s2) = circle_point(num + den / 4, den);
                assert_eq!((c2, s2), (-s, c), "{num}/{den}");
            }
        }
        assert_eq!(circle_point(2, 8), circle_point(1, 4));
        assert_eq!(circle_point(0, 7), (1.0, 0.0));
    }

    #[test]
    fn sphere_small_cases() {
        let one = generate_sphere(1).unwrap();
        assert_eq!(one.len(), 1);
        let p = one.points()[0];
        assert_eq!(p[0], 1.0);
        assert_eq!(p[1], 0.0);
        assert!(p[2].abs() < 1e-15);
        for p in generate_sphere(2).unwrap().points() {
            assert!((dot(*p, *p).sqrt() - 1.0).abs() < 1e-15);
        }
        assert!(generate_sphere(0).is_err());
    }

    #[test]
    fn point_counts_match_closed_forms() {
        for d in 1..=10u32 {
            assert_eq!(generate_sphere(d).unwrap().len(), (d * d) as usize);
            assert_eq!(generate_torus(2.0, 1.0, d).unwrap().len(), (d * d) as usize);
        }
        for m in 2..=10u32 {
            let mm = m as usize;
            assert_eq!(generate_cube(m).unwrap().len(), 6 * mm * mm - 12 * mm + 8);
            assert_eq!(generate_cone(1.0, m).unwrap().len(), cone_count(m as u64), "m={m}");
            // Each face carries m(m+1)/2 sites; edges and corners are shared.
            let tet = generate_tetrahedron(4, m).unwrap().0.len();
            assert_eq!(tet, 4 * mm * (mm + 1) / 2 - 6 * mm + 4);
        }
        assert_eq!(generate_cube(30).unwrap().len(), 5048);
    }

    #[test]
    fn generated_clouds_are_duplicate_free() {
        for m in 2..=8 {
            assert_eq!(generate_cone(1.5, m).unwrap().duplicate_count(), 0);
            assert_eq!(generate_cube(m).unwrap().duplicate_count(), 0);
            assert_eq!(generate_tetrahedron(3, m).unwrap().0.duplicate_count(), 0);
        }
        assert_eq!(generate_sphere(40).unwrap().duplicate_count(), 0);
    }

    #[test]
    fn ellipsoid_residual_and_identity_scaling() {
        let e = generate_ellipsoid(3.0, 3.0, 1.0, 100).unwrap();
        assert_eq!(e.len(), 10_000);
        for [x, y, z] in e.points() {
            let res = (x / 3.0).powi(2) + (y / 3.0).powi(2) + z * z - 1.0;
            assert!(res.abs() < 1e-12);
        }
        assert_eq!(generate_ellipsoid(1.0, 1.0, 1.0, 7).unwrap(), generate_sphere(7).unwrap());
        assert!(generate_ellipsoid(1.0, -1.0, 1.0, 3).is_err());
    }

    #[test]
    fn swapped_ellipsoid_axes_are_an_exact_quarter_turn() {
        let a = generate_ellipsoid(2.0, 3.0, 1.0, 12).unwrap();
        let b = generate_ellipsoid(3.0, 2.0, 1.0, 12).unwrap();
        let rotated: HashSet<[u64; 3]> = a
            .points()
            .iter()
            .map(|&[x, y, z]| point_key(&[-y, x, z]))
            .collect();
        let target: HashSet<[u64; 3]> = b.points().iter().map(point_key).collect();
        assert_eq!(rotated, target);
    }

    #[test]
    fn cone_membership() {
        let h = 1.7;
        let m = 9;
        let cloud = generate_cone(h, m).unwrap();
        let mut cap = 0;
        for &[x, y, z] in cloud.points() {
            let rho2 = x * x + y * y;
            if (z - h).abs() < 1e-15 && rho2 < 1.0 - 1e-12 {
                cap += 1;
            } else if (z - h).abs() < 1e-15 {
                assert!((rho2 - 1.0).abs() < 1e-12);
            } else {
                assert!((rho2 - (z / h).powi(2)).abs() < 1e-12);
            }
            assert!(rho2 <= 1.0 + 1e-12);
        }
        assert!(cap > 0);
        let tiny = generate_cone(1.0, 2).unwrap();
        assert_eq!(tiny.points().iter().filter(|p| **p == [0.0, 0.0, 0.0]).count(), 1);
        assert_eq!(tiny.len(), 10);
        assert!(generate_cone(1.0, 1).is_err());
    }

    #[test]
    fn cube_points_lie_on_the_surface() {
        assert_eq!(generate_cube(2).unwrap().len(), 8);
        for p in generate_cube(7).unwrap().points() {
            let cheb = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            assert_eq!(cheb, 1.0);
        }
    }

    #[test]
    fn torus_residual() {
        let single = generate_torus(2.0, 0.5, 1).unwrap();
        assert_eq!(single.points(), &[[2.5, 0.0, 0.0]]);
        for [x, y, z] in generate_torus(2.0, 1.0, 50).unwrap().points() {
            let res = ((x * x + y * y).sqrt() - 2.0).powi(2) + z * z - 1.0;
            assert!(res.abs() < 1e-12);
        }
        assert!(generate_torus(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn tetrahedra_are_closed_surfaces() {
        for sides in [3, 4] {
            for m in 2..=10 {
                let (cloud, mesh) = generate_tetrahedron(sides, m).unwrap();
                assert_eq!(mesh.euler_characteristic(), 2);
                assert!(mesh.edge_face_counts().iter().all(|(_, c)| *c == 2));
                assert_eq!(cloud.len(), mesh.vertices().len());
            }
        }
        let corners = generate_tetrahedron(4, 2).unwrap().0;
        assert_eq!(corners.len(), 4);
        assert!(generate_tetrahedron(5, 3).is_err());
        let expected = (3f64).sqrt();
        let area = generate_tetrahedron(4, 6).unwrap().1.area();
        assert!((area - expected).abs() < 1e-12);
    }

    #[test]
    fn tetrahedron_points_stay_in_the_hull() {
        let corners = TetrahedronKind::Regular.corners();
        let (cloud, _) = generate_tetrahedron(4, 9).unwrap();
        // Outward face normals; every point satisfies n·(p − face corner) <= 0.
        for tri in [[0usize, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
            let other = (0..4).find(|i| !tri.contains(i)).unwrap();
            let [a, b, c] = tri.map(|i| corners[i]);
            let mut n = cross(sub(b, a), sub(c, a));
            if dot(n, sub(corners[other], a)) > 0.0 {
                n = n.map(|x| -x);
            }
            for p in cloud.points() {
                assert!(dot(n, sub(*p, a)) <= 1e-12);
            }
        }
    }

    #[test]
    fn meshes_are_closed_or_bounded_as_expected() {
        let cube = cube_mesh(5).unwrap();
        assert_eq!(cube.euler_characteristic(), 2);
        assert!((cube.area() - 24.0).abs() < 1e-12);
        let cone = cone_mesh(1.0, 6).unwrap();
        assert_eq!(cone.euler_characteristic(), 2);
        assert!(cone.edge_face_counts().iter().all(|(_, c)| *c == 2));
        let torus = torus_mesh(2.0, 1.0, 12).unwrap();
        assert_eq!(torus.euler_characteristic(), 0);
        let ico = icosphere(3).unwrap();
        assert_eq!(ico.vertices().len(), 10 * 64 + 2);
        assert_eq!(ico.euler_characteristic(), 2);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(generate_sphere(33).unwrap(), generate_sphere(33).unwrap());
        assert_eq!(cone_mesh(1.0, 7).unwrap(), cone_mesh(1.0, 7).unwrap());
    }
}
