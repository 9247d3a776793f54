//! Exact point-to-triangle distance by Voronoi-region classification.

use super::{dot, sub, Point3};

/// Which part of the triangle the closest point lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosestFeature {
    Vertex(u8),
    Edge(u8, u8),
    Face,
}

/// Squared Euclidean distance from `p` to the closed triangle `tri`, together
/// with the feature that realises it.
pub fn point_triangle_distance_sq(p: Point3, tri: &[Point3; 3]) -> (f64, ClosestFeature) {
    let [a, b, c] = *tri;
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (dot(ap, ap), ClosestFeature::Vertex(0));
    }

    let bp = sub(p, b);
    let d3 = dot(ab, bp);
    let d4 = dot(ac, bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (dot(bp, bp), ClosestFeature::Vertex(1));
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (dist_sq(p, lerp(a, ab, v)), ClosestFeature::Edge(0, 1));
    }

    let cp = sub(p, c);
    let d5 = dot(ab, cp);
    let d6 = dot(ac, cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (dot(cp, cp), ClosestFeature::Vertex(2));
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (dist_sq(p, lerp(a, ac, w)), ClosestFeature::Edge(0, 2));
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (dist_sq(p, lerp(b, sub(c, b), w)), ClosestFeature::Edge(1, 2));
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    let q = [
        a[0] + ab[0] * v + ac[0] * w,
        a[1] + ab[1] * v + ac[1] * w,
        a[2] + ab[2] * v + ac[2] * w,
    ];
    (dist_sq(p, q), ClosestFeature::Face)
}

fn lerp(origin: Point3, dir: Point3, t: f64) -> Point3 {
    [
        origin[0] + dir[0] * t,
        origin[1] + dir[1] * t,
        origin[2] + dir[2] * t,
    ]
}

fn dist_sq(a: Point3, b: Point3) -> f64 {
    let d = sub(a, b);
    dot(d, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TRI: [Point3; 3] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];

    #[test]
    fn classifies_each_region() {
        let cases: [(Point3, f64, ClosestFeature); 7] = [
            ([0.25, 0.25, 2.0], 4.0, ClosestFeature::Face),
            ([-1.0, -1.0, 0.0], 2.0, ClosestFeature::Vertex(0)),
            ([2.0, 0.0, 0.0], 1.0, ClosestFeature::Vertex(1)),
            ([0.0, 3.0, 0.0], 4.0, ClosestFeature::Vertex(2)),
            ([0.5, -1.0, 0.0], 1.0, ClosestFeature::Edge(0, 1)),
            ([-2.0, 0.5, 0.0], 4.0, ClosestFeature::Edge(0, 2)),
            ([1.0, 1.0, 0.0], 0.5, ClosestFeature::Edge(1, 2)),
        ];
        for (p, d2, feature) in cases {
            let (got, f) = point_triangle_distance_sq(p, &TRI);
            assert!((got - d2).abs() < 1e-15, "{p:?}: {got} vs {d2}");
            assert_eq!(f, feature, "{p:?}");
        }
    }

    /// Dense barycentric sampling bounds the exact distance from above and
    /// converges to it.
    #[test]
    fn agrees_with_dense_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let steps = 400;
        for _ in 0..40 {
            let tri: [Point3; 3] =
                std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
            let p: Point3 = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let (exact, _) = point_triangle_distance_sq(p, &tri);
            let mut best = f64::INFINITY;
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    let u = i as f64 / steps as f64;
                    let v = j as f64 / steps as f64;
                    let q: Point3 = std::array::from_fn(|a| {
                        tri[0][a] + u * (tri[1][a] - tri[0][a]) + v * (tri[2][a] - tri[0][a])
                    });
                    best = best.min(dist_sq(p, q));
                }
            }
            assert!(exact <= best + 1e-12);
            assert!(best.sqrt() - exact.sqrt() < 1e-2, "{} vs {}", best.sqrt(), exact.sqrt());
        }
    }
}
