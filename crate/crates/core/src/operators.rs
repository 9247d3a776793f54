//! Discrete Laplacians: the lattice graph Laplacian and the cotangent stiffness
//! matrix with its lumped mass.

use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;

use crate::error::{invalid_input, Result};
use crate::geometry::{cross, dot, norm, sub, TriangleMesh};
use crate::lattice::{relabel, LatticeGraph};
use crate::sparse::{Csr, SparseSymmetricOperator};

/// Generalised eigenproblem `S x = λ M x` plus the factor applied to reported
/// eigenvalues: `reported = sign · scale · λ`.
#[derive(Clone, Debug)]
pub struct ScaledOperatorPair {
    pub stiffness: SparseSymmetricOperator,
    /// Diagonal mass matrix; `None` means the identity.
    pub mass: Option<SparseSymmetricOperator>,
    pub scale: f64,
    pub sign: f64,
    /// Connected-component label per unknown, numbered `0..component_count`.
    pub components: Vec<u32>,
    pub component_count: usize,
}

impl ScaledOperatorPair {
    pub fn dim(&self) -> usize {
        self.stiffness.dim()
    }

    /// Mass diagonal, all ones when there is no mass matrix.
    pub fn mass_diagonal(&self) -> Vec<f64> {
        match &self.mass {
            Some(m) => m.diagonal(),
            None => vec![1.0; self.dim()],
        }
    }

    pub fn report(&self, matrix_value: f64) -> f64 {
        self.sign * self.scale * matrix_value
    }

    /// Plain operator with unit scale, positive sign, and components taken from
    /// the off-diagonal sparsity pattern.
    pub fn unscaled(stiffness: SparseSymmetricOperator) -> Self {
        let dim = stiffness.dim();
        let mut uf = UnionFind::<u32>::new(dim);
        for (i, j, _) in stiffness.triplets() {
            if i != j {
                uf.union(i as u32, j as u32);
            }
        }
        let (components, component_count) = relabel((0..dim as u32).map(|v| uf.find(v)));
        Self {
            stiffness,
            mass: None,
            scale: 1.0,
            sign: 1.0,
            components,
            component_count,
        }
    }
}

/// `L = D − A` on the 6-neighbour graph, reported as `−n² λ`.
pub fn graph_laplacian(g: &LatticeGraph) -> ScaledOperatorPair {
    let dim = g.len();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); dim];
    for &[u, v] in g.edges() {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    let mut ptr = Vec::with_capacity(dim + 1);
    ptr.push(0);
    let mut idx = Vec::with_capacity(dim + 2 * g.edges().len());
    let mut val = Vec::with_capacity(idx.capacity());
    for (i, nbrs) in adj.iter_mut().enumerate() {
        nbrs.push(i as u32);
        nbrs.sort_unstable();
        let deg = (nbrs.len() - 1) as f64;
        for &j in nbrs.iter() {
            idx.push(j);
            val.push(if j as usize == i { deg } else { -1.0 });
        }
        ptr.push(idx.len());
    }
    let (components, component_count) = g.component_labels();
    let n = g.n() as f64;
    ScaledOperatorPair {
        stiffness: SparseSymmetricOperator::from_csr(Csr {
            rows: dim,
            cols: dim,
            ptr,
            idx,
            val,
        }),
        mass: None,
        scale: n * n,
        sign: -1.0,
        components,
        component_count,
    }
}

/// Cotangent stiffness `S_ij = −(cot α + cot β)/2` with the lumped mass
/// `M_ii = (1/3) Σ area(incident faces)`. Boundary edges carry their single
/// opposite angle.
pub fn cotangent_laplacian(mesh: &TriangleMesh) -> Result<ScaledOperatorPair> {
    let dim = mesh.vertices().len();
    if let Some(&v) = mesh.unreferenced_vertices().first() {
        return Err(invalid_input(format!(
            "vertex {v} belongs to no face and has zero mass"
        )));
    }
    let mut weights: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let mut mass = vec![0.0; dim];
    let mut uf = UnionFind::<u32>::new(dim);
    for (fi, f) in mesh.faces().iter().enumerate() {
        let p = mesh.triangle(fi);
        let area = mesh.face_area(fi);
        if !(area > 0.0) {
            return Err(invalid_input(format!("face {fi} has zero area")));
        }
        for c in 0..3 {
            let (a, b) = ((c + 1) % 3, (c + 2) % 3);
            let u = sub(p[a], p[c]);
            let v = sub(p[b], p[c]);
            let s = norm(cross(u, v));
            if !(s > 0.0) {
                return Err(invalid_input(format!("face {fi} has a degenerate angle")));
            }
            let (i, j) = (f[a].min(f[b]), f[a].max(f[b]));
            *weights.entry((i, j)).or_insert(0.0) += dot(u, v) / s;
            mass[f[c] as usize] += area / 3.0;
        }
        uf.union(f[0], f[1]);
        uf.union(f[1], f[2]);
    }
    let mut diag = vec![0.0; dim];
    let mut triplets = Vec::with_capacity(2 * weights.len() + dim);
    for (&(i, j), &w) in &weights {
        let half = 0.5 * w;
        triplets.push((i as usize, j as usize, -half));
        triplets.push((j as usize, i as usize, -half));
        diag[i as usize] += half;
        diag[j as usize] += half;
    }
    triplets.extend(diag.into_iter().enumerate().map(|(i, d)| (i, i, d)));
    let (components, component_count) = relabel((0..dim as u32).map(|v| uf.find(v)));
    Ok(ScaledOperatorPair {
        stiffness: SparseSymmetricOperator::from_triplets(dim, triplets)?,
        mass: Some(SparseSymmetricOperator::diagonal_matrix(mass)?),
        scale: 1.0,
        sign: -1.0,
        components,
        component_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointCloud;
    use crate::lattice::voxelize_cloud;

    fn right_triangle() -> TriangleMesh {
        TriangleMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn isolated_vertex_and_single_edge() {
        let g = LatticeGraph::from_sites(3, 0.1, vec![[0, 0, 0]]).unwrap();
        let l = graph_laplacian(&g);
        assert_eq!(l.stiffness.to_dense().as_slice(), &[0.0]);
        assert_eq!(l.scale, 9.0);
        assert_eq!(l.sign, -1.0);
        let g = LatticeGraph::from_sites(1, 0.1, vec![[0, 0, 0], [0, 0, 1]]).unwrap();
        let l = graph_laplacian(&g);
        assert_eq!(l.stiffness.to_dense().as_slice(), &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(l.report(2.0), -2.0);
    }

    #[test]
    fn plus_shape_degrees() {
        let g = voxelize_cloud(&PointCloud::new(vec![[0.0; 3]]).unwrap(), 1.0, 1).unwrap();
        let l = graph_laplacian(&g);
        let mut diag = l.stiffness.diagonal();
        diag.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(diag, vec![6.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert!(l.stiffness.row_sums().iter().all(|&s| s == 0.0));
        assert_eq!(l.component_count, 1);
    }

    #[test]
    fn right_triangle_weights_and_mass() {
        let pair = cotangent_laplacian(&right_triangle()).unwrap();
        let s = &pair.stiffness;
        // The hypotenuse (1, 2) faces the right angle; the legs face 45° angles.
        assert!(s.get(1, 2).abs() < 1e-15);
        assert!((s.get(0, 1) + 0.5).abs() < 1e-15);
        assert!((s.get(0, 2) + 0.5).abs() < 1e-15);
        assert!(s.row_sums().iter().all(|r| r.abs() < 1e-15));
        for m in pair.mass_diagonal() {
            assert!((m - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn equilateral_weights() {
        let h = 3f64.sqrt() / 2.0;
        let mesh = TriangleMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let s = cotangent_laplacian(&mesh).unwrap().stiffness;
        let w = 1.0 / 3f64.sqrt();
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            assert!((s.get(i, j) + w / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn total_mass_equals_area_and_components_follow_faces() {
        let mesh = crate::geometry::cube_mesh(4).unwrap();
        let pair = cotangent_laplacian(&mesh).unwrap();
        let total: f64 = pair.mass_diagonal().iter().sum();
        assert!((total - mesh.area()).abs() < 1e-12);
        assert_eq!(pair.component_count, 1);
        assert!(pair.stiffness.row_sums().iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn unreferenced_vertex_is_rejected() {
        let mesh = TriangleMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [5.0, 5.0, 5.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(cotangent_laplacian(&mesh), Err(crate::Error::InvalidInput(_))));
    }
}
