//! Brute-force and extended-precision oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_traits::{Float, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectral_lattice::geometry::{point_triangle_distance_sq, Point3, TriangleMesh};
use spectral_lattice::lattice::LatticeGraph;
use spectral_lattice::operators::ScaledOperatorPair;
use spectral_lattice::sparse::SparseSymmetricOperator;

pub fn fixtures_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

// ---------------------------------------------------------------- lattice

fn coord(i: i32, n: u32) -> f64 {
    i as f64 / n as f64
}

fn d2(q: Point3, p: Point3) -> f64 {
    let dx = q[0] - p[0];
    let dy = q[1] - p[1];
    let dz = q[2] - p[2];
    dx * dx + dy * dy + dz * dz
}

/// Index range covering `[lo − r, hi + r]` on one axis, padded by one.
fn axis_range(lo: f64, hi: f64, r: f64, n: u32) -> (i32, i32) {
    let nf = n as f64;
    (((lo - r) * nf).floor() as i32 - 1, ((hi + r) * nf).ceil() as i32 + 1)
}

fn bounds(points: &[Point3]) -> (Point3, Point3) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    (lo, hi)
}

/// Number of lattice points in the expanded bounding box.
pub fn aabb_count(points: &[Point3], r: f64, n: u32) -> u64 {
    let (lo, hi) = bounds(points);
    (0..3)
        .map(|a| {
            let (i0, i1) = axis_range(lo[a], hi[a], r, n);
            (i1 - i0 + 1) as u64
        })
        .product()
}

/// Every site of the expanded bounding box tested against every seed.
fn brute_sites(points: &[Point3], r: f64, n: u32, inside: impl Fn(Point3) -> bool) -> Vec<[i32; 3]> {
    let (lo, hi) = bounds(points);
    let ranges: Vec<(i32, i32)> = (0..3).map(|a| axis_range(lo[a], hi[a], r, n)).collect();
    let mut out = Vec::new();
    for i in ranges[0].0..=ranges[0].1 {
        for j in ranges[1].0..=ranges[1].1 {
            for k in ranges[2].0..=ranges[2].1 {
                if inside([coord(i, n), coord(j, n), coord(k, n)]) {
                    out.push([i, j, k]);
                }
            }
        }
    }
    out
}

pub fn brute_cloud_sites(points: &[Point3], r: f64, n: u32) -> Vec<[i32; 3]> {
    let r2 = r * r;
    brute_sites(points, r, n, |q| points.iter().any(|&p| d2(q, p) <= r2))
}

pub fn brute_mesh_sites(mesh: &TriangleMesh, r: f64, n: u32) -> Vec<[i32; 3]> {
    let r2 = r * r;
    let tris: Vec<[Point3; 3]> = (0..mesh.faces().len()).map(|f| mesh.triangle(f)).collect();
    brute_sites(mesh.vertices(), r, n, |q| {
        tris.iter().any(|t| point_triangle_distance_sq(q, t).0 <= r2)
    })
}

/// Unordered unit-step pairs among `sites`, as coordinate pairs.
pub fn brute_edges(sites: &[[i32; 3]]) -> BTreeSet<([i32; 3], [i32; 3])> {
    let set: HashSet<[i32; 3]> = sites.iter().copied().collect();
    let mut out = BTreeSet::new();
    for &s in sites {
        for a in 0..3 {
            let mut t = s;
            t[a] += 1;
            if set.contains(&t) {
                out.insert((s, t));
            }
        }
    }
    out
}

pub fn graph_edges(g: &LatticeGraph) -> BTreeSet<([i32; 3], [i32; 3])> {
    let v = g.verts();
    g.edges()
        .iter()
        .map(|&[a, b]| {
            let (p, q) = (v[a as usize], v[b as usize]);
            if p < q {
                (p, q)
            } else {
                (q, p)
            }
        })
        .collect()
}

/// Sites and edges of `g` agree with the brute-force oracle.
pub fn lattice_matches(g: &LatticeGraph, sites: &[[i32; 3]]) -> bool {
    g.verts() == sites && graph_edges(g) == brute_edges(sites)
}

// ----------------------------------------------------------- distances

fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn segment_d2(p: Point3, a: Point3, b: Point3) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 { (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    d2(p, [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]])
}

/// Minimum over the plane projection (when it falls inside) and the three
/// edge segments.
pub fn triangle_d2_oracle(p: Point3, t: &[Point3; 3]) -> f64 {
    let [a, b, c] = *t;
    let mut best = segment_d2(p, a, b).min(segment_d2(p, b, c)).min(segment_d2(p, c, a));
    let nrm = cross(sub(b, a), sub(c, a));
    let nn = dot(nrm, nrm);
    if nn > 0.0 {
        let h = dot(sub(p, a), nrm) / nn;
        let q = [p[0] - h * nrm[0], p[1] - h * nrm[1], p[2] - h * nrm[2]];
        let inside = [(a, b), (b, c), (c, a)]
            .iter()
            .all(|&(u, v)| dot(cross(sub(v, u), sub(q, u)), nrm) >= 0.0);
        if inside {
            best = best.min(h * h * nn);
        }
    }
    best
}

// --------------------------------------------------------------- Bessel

/// Fractional bits of the fixed-point oracle.
const FRAC: usize = 320;

/// Exact fixed-point image of a finite double.
fn fix(x: f64) -> BigInt {
    let (mant, exp, sign) = x.integer_decode();
    let m = BigInt::from(mant) * BigInt::from(sign);
    let shift = exp as i64 + FRAC as i64;
    if shift >= 0 {
        m << shift as usize
    } else {
        m >> (-shift) as usize
    }
}

fn unfix(v: &BigInt) -> f64 {
    v.to_f64().unwrap() * 2f64.powi(-(FRAC as i32))
}

/// `J_ν(x)` and `J′_ν(x)` from the power series in 320-bit fixed point, with
/// the prefactor `(x/2)^ν / Γ(ν+1)` in double precision.
pub fn bessel_series_oracle(nu: f64, x: f64) -> (f64, f64) {
    let half = fix(0.5 * x);
    let q = -((&half * &half) >> FRAC);
    let nu_f = fix(nu);
    let one = BigInt::from(1) << FRAC;
    let mut term = one.clone();
    let mut sum = term.clone();
    let mut dsum = &nu_f * &term >> FRAC;
    for k in 1..2000u32 {
        let kb = BigInt::from(k);
        let denom = &kb * (&one * &kb + &nu_f);
        term = ((&term * &q) << FRAC) / denom >> FRAC;
        sum += &term;
        dsum += ((BigInt::from(2 * k) << FRAC) + &nu_f) * &term >> FRAC;
        if k > 10 && term.is_zero() {
            break;
        }
    }
    let pre = (0.5 * x).powf(nu) / statrs::function::gamma::gamma(nu + 1.0);
    (pre * unfix(&sum), pre * unfix(&dsum) / x)
}

// ---------------------------------------------------------------- graphs

pub fn laplacian(dim: usize, edges: &[(usize, usize)]) -> ScaledOperatorPair {
    let mut t = Vec::new();
    for &(u, v) in edges {
        t.extend([(u, v, -1.0), (v, u, -1.0), (u, u, 1.0), (v, v, 1.0)]);
    }
    if t.is_empty() {
        t.push((0, 0, 0.0));
    }
    ScaledOperatorPair::unscaled(SparseSymmetricOperator::from_triplets(dim, t).unwrap())
}

pub fn path_edges(m: usize, offset: usize) -> Vec<(usize, usize)> {
    (0..m - 1).map(|i| (offset + i, offset + i + 1)).collect()
}

pub fn cycle_edges(m: usize, offset: usize) -> Vec<(usize, usize)> {
    (0..m).map(|i| (offset + i, offset + (i + 1) % m)).collect()
}

pub fn complete_edges(m: usize, offset: usize) -> Vec<(usize, usize)> {
    (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (offset + i, offset + j)))
        .collect()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Nonzero Laplacian eigenvalues in ascending order.
pub fn path_spectrum(m: usize) -> Vec<f64> {
    sorted((1..m).map(|j| 2.0 - 2.0 * (std::f64::consts::PI * j as f64 / m as f64).cos()).collect())
}

pub fn cycle_spectrum(m: usize) -> Vec<f64> {
    sorted(
        (1..m)
            .map(|j| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * j as f64 / m as f64).cos())
            .collect(),
    )
}

pub fn complete_spectrum(m: usize) -> Vec<f64> {
    vec![m as f64; m - 1]
}

/// Random subset of an `s × s × s` block, each site kept with probability `keep`.
pub fn random_fragment(seed: u64, s: i32, keep: f64) -> Vec<[i32; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for i in 0..s {
        for j in 0..s {
            for k in 0..s {
                if rng.gen_bool(keep) {
                    out.push([i, j, k]);
                }
            }
        }
    }
    out
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
