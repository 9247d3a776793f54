//! Cubic-lattice approximation `B_r(P) ∩ (ℤ/n)³` of a thin shell around a shape.
//!
//! The lattice is anchored at the origin with spacing `1/n`. A site `(i, j, k)`
//! sits at `(i/n, j/n, k/n)` and joins the shell when its squared distance to the
//! seed geometry is at most `r²`.

use std::collections::HashMap;
use std::io::Write;

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;

use crate::error::{invalid_arg, Error, Result};
use crate::geometry::{bounds_of, point_triangle_distance_sq, Point3, PointCloud, TriangleMesh};

pub const DEFAULT_MAX_VERTS: u64 = 50_000_000;

#[derive(Clone, Copy, Debug)]
pub struct VoxelizeOptions {
    /// Upper bound on the estimated number of lattice sites.
    pub max_verts: u64,
}

impl Default for VoxelizeOptions {
    fn default() -> Self {
        Self {
            max_verts: DEFAULT_MAX_VERTS,
        }
    }
}

/// Position of lattice index `i` along one axis.
#[inline]
pub fn lattice_coord(i: i32, n: u32) -> f64 {
    i as f64 / n as f64
}

/// `‖q − p‖²` summed in axis order. Every membership test goes through here.
#[inline]
pub fn dist_sq(q: Point3, p: Point3) -> f64 {
    let dx = q[0] - p[0];
    let dy = q[1] - p[1];
    let dz = q[2] - p[2];
    dx * dx + dy * dy + dz * dz
}

/// Lattice sites with their 6-neighbour edges.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeGraph {
    n: u32,
    r: f64,
    verts: Vec<[i32; 3]>,
    edges: Vec<[u32; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct LatticeStats {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub component_count: usize,
    /// `degree_histogram[d]` counts vertices of degree `d`.
    pub degree_histogram: [usize; 7],
}

impl LatticeGraph {
    /// Builds the graph from sorted, unique sites, deriving the edges.
    pub fn from_sites(n: u32, r: f64, verts: Vec<[i32; 3]>) -> Result<Self> {
        if verts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid_arg("lattice sites must be strictly sorted"));
        }
        let edges = six_neighbour_edges(&verts);
        Ok(Self { n, r, verts, edges })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn verts(&self) -> &[[i32; 3]] {
        &self.verts
    }

    /// Undirected edges `[u, v]` with `u < v`, sorted.
    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn position(&self, v: usize) -> Point3 {
        self.verts[v].map(|c| lattice_coord(c, self.n))
    }

    pub fn positions(&self) -> Vec<Point3> {
        (0..self.len()).map(|v| self.position(v)).collect()
    }

    pub fn degrees(&self) -> Vec<u8> {
        let mut deg = vec![0u8; self.len()];
        for &[u, v] in &self.edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        deg
    }

    /// Component label per vertex, numbered in order of first appearance.
    pub fn component_labels(&self) -> (Vec<u32>, usize) {
        let mut uf = UnionFind::<u32>::new(self.len());
        for &[u, v] in &self.edges {
            uf.union(u, v);
        }
        relabel((0..self.len() as u32).map(|v| uf.find(v)))
    }

    pub fn stats(&self) -> LatticeStats {
        let mut degree_histogram = [0usize; 7];
        for d in self.degrees() {
            degree_histogram[d as usize] += 1;
        }
        LatticeStats {
            vertex_count: self.len(),
            edge_count: self.edges.len(),
            component_count: self.component_labels().1,
            degree_histogram,
        }
    }

    pub fn write_ply<W: Write>(&self, w: &mut W) -> Result<()> {
        crate::geometry::io::write_ply(w, &self.positions(), None)
    }

    /// One `u v` pair per line.
    pub fn write_adjacency<W: Write>(&self, w: &mut W) -> Result<()> {
        for [u, v] in &self.edges {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }
}

pub fn lattice_stats(g: &LatticeGraph) -> LatticeStats {
    g.stats()
}

/// Maps arbitrary representative ids to `0..count` by first appearance.
pub(crate) fn relabel(roots: impl Iterator<Item = u32>) -> (Vec<u32>, usize) {
    let mut map = HashMap::new();
    let labels = roots
        .map(|r| {
            let next = map.len() as u32;
            *map.entry(r).or_insert(next)
        })
        .collect();
    (labels, map.len())
}

fn six_neighbour_edges(verts: &[[i32; 3]]) -> Vec<[u32; 2]> {
    // Sorted sites form contiguous (i, j) rows.
    let mut rows: HashMap<(i32, i32), (usize, usize)> = HashMap::new();
    let mut start = 0;
    for v in 1..=verts.len() {
        if v == verts.len() || verts[v][..2] != verts[start][..2] {
            rows.insert((verts[start][0], verts[start][1]), (start, v));
            start = v;
        }
    }
    let find = |i: i32, j: i32, k: i32| -> Option<u32> {
        let &(lo, hi) = rows.get(&(i, j))?;
        verts[lo..hi]
            .binary_search_by_key(&k, |s| s[2])
            .ok()
            .map(|p| (lo + p) as u32)
    };
    let mut edges = Vec::with_capacity(verts.len() * 3);
    for (u, &[i, j, k]) in verts.iter().enumerate() {
        let u = u as u32;
        if verts.get(u as usize + 1) == Some(&[i, j, k + 1]) {
            edges.push([u, u + 1]);
        }
        if let Some(v) = find(i, j + 1, k) {
            edges.push([u, v]);
        }
        if let Some(v) = find(i + 1, j, k) {
            edges.push([u, v]);
        }
    }
    edges
}

fn check_params(r: f64, n: u32) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid_arg(format!("shell radius r must be positive, got {r}")));
    }
    if n == 0 {
        return Err(invalid_arg("lattice density n must be at least 1"));
    }
    Ok(())
}

/// Inclusive index range covering `[lo, hi]` along one axis, widened by one
/// site on each side so rounding never drops a candidate.
fn index_range(lo: f64, hi: f64, n: u32) -> Result<(i32, i32)> {
    let a = (lo * n as f64).floor() - 1.0;
    let b = (hi * n as f64).ceil() + 1.0;
    if a < i32::MIN as f64 / 2.0 || b > i32::MAX as f64 / 2.0 {
        return Err(invalid_arg("lattice indices overflow 32-bit range"));
    }
    Ok((a as i32, b as i32))
}

struct Grid {
    n: u32,
    r2: f64,
    lo: [i32; 3],
    hi: [i32; 3],
}

impl Grid {
    fn new(lo: Point3, hi: Point3, r: f64, n: u32) -> Result<Self> {
        let mut glo = [0; 3];
        let mut ghi = [0; 3];
        for a in 0..3 {
            (glo[a], ghi[a]) = index_range(lo[a] - r, hi[a] + r, n)?;
        }
        Ok(Self {
            n,
            r2: r * r,
            lo: glo,
            hi: ghi,
        })
    }

    fn extent(&self, a: usize) -> u64 {
        (self.hi[a] - self.lo[a] + 1) as u64
    }

    fn box_count(&self) -> u64 {
        self.extent(0)
            .saturating_mul(self.extent(1))
            .saturating_mul(self.extent(2))
    }

    /// Range of indices along axis `a` for the interval `[lo, hi]`, clipped.
    fn clip(&self, a: usize, lo: f64, hi: f64) -> (i32, i32) {
        let (l, h) = index_range(lo, hi, self.n).unwrap_or((self.lo[a], self.hi[a]));
        (l.max(self.lo[a]), h.min(self.hi[a]))
    }

    /// Runs `fill` for every x-slab and gathers the marked sites in order.
    fn sweep<F>(&self, fill: F) -> Vec<[i32; 3]>
    where
        F: Fn(i32, &mut SlabMask) + Sync,
    {
        let (ny, nz) = (self.extent(1) as usize, self.extent(2) as usize);
        let slabs: Vec<Vec<[i32; 3]>> = (self.lo[0]..=self.hi[0])
            .into_par_iter()
            .map(|i| {
                let mut mask = SlabMask {
                    lo: [self.lo[1], self.lo[2]],
                    nz,
                    bits: vec![false; ny * nz],
                    any: false,
                };
                fill(i, &mut mask);
                if !mask.any {
                    return Vec::new();
                }
                mask.bits
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| **b)
                    .map(|(c, _)| {
                        [i, mask.lo[0] + (c / nz) as i32, mask.lo[1] + (c % nz) as i32]
                    })
                    .collect()
            })
            .collect();
        slabs.concat()
    }
}

struct SlabMask {
    lo: [i32; 2],
    nz: usize,
    bits: Vec<bool>,
    any: bool,
}

impl SlabMask {
    #[inline]
    fn cell(&self, j: i32, k: i32) -> usize {
        (j - self.lo[0]) as usize * self.nz + (k - self.lo[1]) as usize
    }
}

fn check_cap(estimated: u64, opts: &VoxelizeOptions) -> Result<()> {
    if estimated > opts.max_verts {
        return Err(Error::ResourceLimit {
            estimated,
            cap: opts.max_verts,
        });
    }
    Ok(())
}

/// Buckets items by the x-slabs their widened extent touches.
fn slab_buckets(grid: &Grid, extents: impl Iterator<Item = (f64, f64)>) -> Vec<Vec<u32>> {
    let mut buckets = vec![Vec::new(); grid.extent(0) as usize];
    for (id, (lo, hi)) in extents.enumerate() {
        let (a, b) = grid.clip(0, lo, hi);
        for i in a..=b {
            buckets[(i - grid.lo[0]) as usize].push(id as u32);
        }
    }
    buckets
}

pub fn voxelize_cloud(cloud: &PointCloud, r: f64, n: u32) -> Result<LatticeGraph> {
    voxelize_cloud_with(cloud, r, n, &VoxelizeOptions::default())
}

/// Every lattice site within closed distance `r` of some cloud point.
pub fn voxelize_cloud_with(
    cloud: &PointCloud,
    r: f64,
    n: u32,
    opts: &VoxelizeOptions,
) -> Result<LatticeGraph> {
    check_params(r, n)?;
    let pts = cloud.points();
    let (lo, hi) = bounds_of(pts).ok_or_else(|| invalid_arg("point cloud is empty"))?;
    let grid = Grid::new(lo, hi, r, n)?;
    let per_point = (2 * (r * n as f64).ceil() as u64 + 3).pow(3);
    check_cap(grid.box_count().min((pts.len() as u64).saturating_mul(per_point)), opts)?;

    let buckets = slab_buckets(&grid, pts.iter().map(|p| (p[0] - r, p[0] + r)));
    let verts = grid.sweep(|i, mask| {
        let qx = lattice_coord(i, n);
        for &pi in &buckets[(i - grid.lo[0]) as usize] {
            let p = pts[pi as usize];
            let (j0, j1) = grid.clip(1, p[1] - r, p[1] + r);
            let (k0, k1) = grid.clip(2, p[2] - r, p[2] + r);
            for j in j0..=j1 {
                let qy = lattice_coord(j, n);
                for k in k0..=k1 {
                    let c = mask.cell(j, k);
                    if !mask.bits[c] && dist_sq([qx, qy, lattice_coord(k, n)], p) <= grid.r2 {
                        mask.bits[c] = true;
                        mask.any = true;
                    }
                }
            }
        }
    });
    LatticeGraph::from_sites(n, r, verts)
}

pub fn voxelize_mesh(mesh: &TriangleMesh, r: f64, n: u32) -> Result<LatticeGraph> {
    voxelize_mesh_with(mesh, r, n, &VoxelizeOptions::default())
}

/// Every lattice site within closed distance `r` of the triangle surface.
pub fn voxelize_mesh_with(
    mesh: &TriangleMesh,
    r: f64,
    n: u32,
    opts: &VoxelizeOptions,
) -> Result<LatticeGraph> {
    check_params(r, n)?;
    if mesh.faces().is_empty() {
        return Err(invalid_arg("mesh has no faces"));
    }
    let tris: Vec<[Point3; 3]> = (0..mesh.faces().len()).map(|f| mesh.triangle(f)).collect();
    let corners: Vec<Point3> = tris.iter().flatten().copied().collect();
    let (lo, hi) = bounds_of(&corners).expect("faces present");
    let grid = Grid::new(lo, hi, r, n)?;
    check_cap(grid.box_count(), opts)?;

    let tri_bounds: Vec<(Point3, Point3)> =
        tris.iter().map(|t| bounds_of(t).expect("three corners")).collect();
    let buckets = slab_buckets(&grid, tri_bounds.iter().map(|(l, h)| (l[0] - r, h[0] + r)));
    let verts = grid.sweep(|i, mask| {
        let qx = lattice_coord(i, n);
        for &ti in &buckets[(i - grid.lo[0]) as usize] {
            let (l, h) = tri_bounds[ti as usize];
            let (j0, j1) = grid.clip(1, l[1] - r, h[1] + r);
            let (k0, k1) = grid.clip(2, l[2] - r, h[2] + r);
            for j in j0..=j1 {
                let qy = lattice_coord(j, n);
                for k in k0..=k1 {
                    let c = mask.cell(j, k);
                    if mask.bits[c] {
                        continue;
                    }
                    let q = [qx, qy, lattice_coord(k, n)];
                    if point_triangle_distance_sq(q, &tris[ti as usize]).0 <= grid.r2 {
                        mask.bits[c] = true;
                        mask.any = true;
                    }
                }
            }
        }
    });
    LatticeGraph::from_sites(n, r, verts)
}
