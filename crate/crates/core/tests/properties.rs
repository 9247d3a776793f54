mod support;

use std::collections::HashSet;

use proptest::prelude::*;

use spectral_lattice::analytic::{cone_characteristic, cone_spectrum, sphere_spectrum, ConeParams};
use spectral_lattice::eigensolve::{group_values, smallest_nonzero};
use spectral_lattice::geometry::io::{parse_obj, parse_off, parse_xyz, parse_ply, write_obj, write_off, write_ply, write_xyz};
use spectral_lattice::geometry::{icosphere, torus_mesh, PointCloud, TriangleMesh};
use spectral_lattice::harness::compare_values;
use spectral_lattice::lattice::{voxelize_cloud, LatticeGraph};
use spectral_lattice::operators::{cotangent_laplacian, graph_laplacian};

use support::random_fragment;

fn cloud_points() -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec(prop::array::uniform3(-2.0f64..2.0), 1..20)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lattice_grows_with_radius(pts in cloud_points(), r in 0.05f64..0.3, dr in 0.0f64..0.2, n in 2u32..10) {
        let cloud = PointCloud::new(pts).unwrap();
        let small = voxelize_cloud(&cloud, r, n).unwrap();
        let big = voxelize_cloud(&cloud, r + dr, n).unwrap();
        let big_set: HashSet<_> = big.verts().iter().collect();
        prop_assert!(small.verts().iter().all(|v| big_set.contains(v)));
        prop_assert!(small.edges().len() <= big.edges().len());
    }

    #[test]
    fn graph_laplacian_structure(seed in 0u64..1000, side in 2i32..7, keep in 0.2f64..1.0) {
        let sites = random_fragment(seed, side, keep);
        prop_assume!(!sites.is_empty());
        let g = LatticeGraph::from_sites(5, 0.2, sites).unwrap();
        let pair = graph_laplacian(&g);
        let op = &pair.stiffness;
        for ((i, row_sum), deg) in op.row_sums().iter().enumerate().zip(g.degrees()) {
            prop_assert_eq!(*row_sum, 0.0);
            prop_assert_eq!(op.get(i, i), deg as f64);
        }
        for (i, j, v) in op.triplets() {
            prop_assert_eq!(op.get(j, i), v);
        }
        let (_, count) = g.component_labels();
        prop_assert_eq!(pair.component_count, count);
        prop_assert_eq!(pair.report(1.0), -25.0);
        let stats = g.stats();
        prop_assert_eq!(stats.degree_histogram.iter().sum::<usize>(), g.len());
        prop_assert_eq!(
            stats.degree_histogram.iter().enumerate().map(|(d, c)| d * c).sum::<usize>(),
            2 * g.edges().len()
        );
        let k = 3.min(pair.dim() - count);
        if k > 0 {
            let res = smallest_nonzero(&pair, k, 1e-8).unwrap();
            prop_assert_eq!(res.meta.kernel_dim, count);
            prop_assert!(res.eigenvalues.iter().all(|v| *v < 0.0));
        }
    }

    #[test]
    fn cotangent_operator_on_scaled_meshes(sx in 0.5f64..2.0, sy in 0.5f64..2.0, sz in 0.5f64..2.0, torus in any::<bool>()) {
        let base = if torus { torus_mesh(2.0, 0.7, 10).unwrap() } else { icosphere(2).unwrap() };
        let vertices: Vec<[f64; 3]> = base.vertices().iter().map(|p| [sx * p[0], sy * p[1], sz * p[2]]).collect();
        let mesh = TriangleMesh::new(vertices, base.faces().to_vec()).unwrap();
        let pair = cotangent_laplacian(&mesh).unwrap();
        let scale = pair.stiffness.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for s in pair.stiffness.row_sums() {
            prop_assert!(s.abs() <= 1e-12 * scale);
        }
        for (i, j, v) in pair.stiffness.triplets() {
            prop_assert_eq!(pair.stiffness.get(j, i), v);
        }
        let mass: f64 = pair.mass_diagonal().iter().sum();
        prop_assert!((mass - mesh.area()).abs() <= 1e-12 * mesh.area());
        prop_assert_eq!(pair.component_count, 1);
    }

    #[test]
    fn grouping_partitions_the_list(mut vals in prop::collection::vec(-50.0f64..-0.1, 1..30), reltol in 0.0f64..0.2) {
        vals.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        let groups = group_values(&vals, reltol);
        prop_assert_eq!(groups.iter().map(|g| g.multiplicity).sum::<usize>(), vals.len());
        let mut next = 0;
        for g in &groups {
            prop_assert_eq!(g.first, next);
            let members = &vals[g.first..g.first + g.multiplicity];
            let v0 = members[0].abs();
            prop_assert!(members.iter().all(|v| v.abs() - v0 <= reltol * v0));
            let lo = members.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = members.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(g.value >= lo - 1e-12 && g.value <= hi + 1e-12);
            next += g.multiplicity;
        }
    }

    #[test]
    fn comparison_ignores_input_order(vals in prop::collection::vec(-30.0f64..-0.5, 1..20), rot in 0usize..20) {
        let mut shuffled = vals.clone();
        let len = shuffled.len();
        shuffled.rotate_left(rot % len);
        let a = compare_values(&vals, &vals, 0.05);
        let b = compare_values(&shuffled, &vals, 0.05);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|r| r.relative_error == Some(0.0)));
    }

    #[test]
    fn cloud_files_round_trip(pts in cloud_points()) {
        let mut xyz = Vec::new();
        write_xyz(&mut xyz, &pts).unwrap();
        let parsed = parse_xyz(std::str::from_utf8(&xyz).unwrap()).unwrap();
        prop_assert_eq!(parsed.points(), &pts[..]);
        let q: Vec<f64> = pts.iter().map(|p| p[0] - p[2]).collect();
        let mut ply = Vec::new();
        write_ply(&mut ply, &pts, Some(&q)).unwrap();
        let (cloud, quality) = parse_ply(std::str::from_utf8(&ply).unwrap()).unwrap();
        prop_assert_eq!(cloud.points(), &pts[..]);
        prop_assert_eq!(quality, Some(q));
    }

    #[test]
    fn sphere_ladder_sums_to_k(k in 1usize..200) {
        let s = sphere_spectrum(k).unwrap();
        prop_assert_eq!(s.total_multiplicity(), k);
        for (i, e) in s.entries.iter().enumerate() {
            let l = (i + 1) as f64;
            prop_assert_eq!(e.eigenvalue, -l * (l + 1.0));
            if i + 1 < s.entries.len() {
                prop_assert_eq!(e.multiplicity as usize, 2 * (i + 1) + 1);
            }
        }
    }
}

#[test]
fn mesh_files_round_trip() {
    let mesh = torus_mesh(2.0, 0.5, 7).unwrap();
    let mut off = Vec::new();
    write_off(&mut off, &mesh).unwrap();
    assert_eq!(parse_off(std::str::from_utf8(&off).unwrap()).unwrap().mesh, mesh);
    let mut obj = Vec::new();
    write_obj(&mut obj, &mesh).unwrap();
    assert_eq!(parse_obj(std::str::from_utf8(&obj).unwrap()).unwrap().mesh, mesh);
}

#[test]
fn cone_roots_are_sign_changes() {
    let p = ConeParams::default();
    let s = cone_spectrum(p, 60.0, 6).unwrap();
    for pair in s.entries.windows(2) {
        assert!(pair[0].eigenvalue >= pair[1].eigenvalue);
    }
    for e in &s.entries {
        let root = -e.eigenvalue;
        let lo = cone_characteristic(e.label, root - 1e-6, p).unwrap();
        let hi = cone_characteristic(e.label, root + 1e-6, p).unwrap();
        assert!(lo * hi < 0.0, "n = {} root {root}", e.label);
        assert_eq!(e.multiplicity, if e.label == 0 { 1 } else { 2 });
    }
}

#[test]
fn steeper_cone_has_more_roots_below_cutoff() {
    // A larger slope h lengthens the lateral side, which lowers the spectrum.
    let flat = cone_spectrum(ConeParams::new(1.0).unwrap(), 40.0, 6).unwrap();
    let steep = cone_spectrum(ConeParams::new(2.0).unwrap(), 40.0, 6).unwrap();
    assert!(steep.total_multiplicity() > flat.total_multiplicity());
}
