//! Smoothed-aggregation algebraic multigrid, used as an approximate inverse of
//! the regularised stiffness matrix.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::sparse::Csr;

/// Levels at or below this size are solved directly.
const COARSE_ROWS: usize = 500;
const MAX_LEVELS: usize = 25;
/// Relative eigenvalue cutoff of the coarse pseudo-inverse.
const PINV_CUTOFF: f64 = 1e-9;

struct Level {
    a: Csr,
    p: Csr,
    pt: Csr,
}

enum Coarse {
    Dense(DMatrix<f64>),
    /// Stalled coarsening on a large level: many smoothing sweeps instead.
    Sweeps(Csr),
}

pub(crate) struct Amg {
    levels: Vec<Level>,
    coarse: Coarse,
}

impl Amg {
    pub fn new(a: Csr) -> Self {
        let mut levels = Vec::new();
        let mut a = a;
        while a.rows > COARSE_ROWS && levels.len() < MAX_LEVELS {
            let (agg, count) = aggregate(&a);
            if count * 10 > a.rows * 9 {
                break;
            }
            let p = smoothed_prolongator(&a, &agg, count);
            let pt = p.transpose();
            let ac = symmetrize(&pt.matmul(&a.matmul(&p)));
            levels.push(Level { a, p, pt });
            a = ac;
        }
        let coarse = if a.rows <= 8 * COARSE_ROWS {
            Coarse::Dense(pseudo_inverse(&a))
        } else {
            Coarse::Sweeps(a)
        };
        Self { levels, coarse }
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.levels.iter().map(|l| l.a.rows).collect();
        sizes.push(match &self.coarse {
            Coarse::Dense(m) => m.nrows(),
            Coarse::Sweeps(a) => a.rows,
        });
        sizes
    }

    /// Sum of stored entries over all levels relative to the finest level.
    pub fn operator_complexity(&self) -> f64 {
        let fine = self.levels.first().map_or(1, |l| l.a.nnz()) as f64;
        let total: usize = self.levels.iter().map(|l| l.a.nnz()).sum::<usize>()
            + match &self.coarse {
                Coarse::Dense(m) => m.len(),
                Coarse::Sweeps(a) => a.nnz(),
            };
        total as f64 / fine
    }

    /// One V-cycle from a zero initial guess.
    pub fn apply(&self, b: &[f64]) -> Vec<f64> {
        self.cycle(0, b)
    }

    fn cycle(&self, l: usize, b: &[f64]) -> Vec<f64> {
        let Some(level) = self.levels.get(l) else {
            return match &self.coarse {
                Coarse::Dense(m) => (m * DVector::from_column_slice(b)).as_slice().to_vec(),
                Coarse::Sweeps(a) => {
                    let mut x = vec![0.0; b.len()];
                    for _ in 0..20 {
                        gauss_seidel(a, &mut x, b, true);
                        gauss_seidel(a, &mut x, b, false);
                    }
                    x
                }
            };
        };
        let mut x = vec![0.0; b.len()];
        gauss_seidel(&level.a, &mut x, b, true);
        let ax = level.a.mul(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let xc = self.cycle(l + 1, &level.pt.mul(&r));
        for (xi, ci) in x.iter_mut().zip(level.p.mul(&xc)) {
            *xi += ci;
        }
        gauss_seidel(&level.a, &mut x, b, false);
        x
    }
}

fn gauss_seidel(a: &Csr, x: &mut [f64], b: &[f64], forward: bool) {
    let mut relax = |i: usize| {
        let (idx, val) = a.row(i);
        let mut diag = 0.0;
        let mut s = b[i];
        for (&j, &v) in idx.iter().zip(val) {
            if j as usize == i {
                diag = v;
            } else {
                s -= v * x[j as usize];
            }
        }
        if diag != 0.0 {
            x[i] = s / diag;
        }
    };
    if forward {
        (0..a.rows).for_each(&mut relax);
    } else {
        (0..a.rows).rev().for_each(&mut relax);
    }
}

/// Greedy three-pass aggregation over all off-diagonal connections.
/// Returns the aggregate of every row and the number of aggregates.
fn aggregate(a: &Csr) -> (Vec<u32>, usize) {
    const NONE: u32 = u32::MAX;
    let n = a.rows;
    let neighbours = |i: usize| {
        let (idx, val) = a.row(i);
        idx.iter()
            .zip(val)
            .filter(move |(&j, &v)| j as usize != i && v != 0.0)
            .map(|(&j, _)| j as usize)
    };
    let mut agg = vec![NONE; n];
    let mut count = 0u32;
    // Pass 1: seed aggregates from nodes whose whole neighbourhood is free.
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        let mut nbrs = neighbours(i).peekable();
        if nbrs.peek().is_none() {
            agg[i] = count;
            count += 1;
            continue;
        }
        if neighbours(i).all(|j| agg[j] == NONE) {
            agg[i] = count;
            for j in neighbours(i) {
                agg[j] = count;
            }
            count += 1;
        }
    }
    // Pass 2: attach leftovers to a neighbouring aggregate from pass 1.
    let first_pass = agg.clone();
    for i in 0..n {
        if agg[i] == NONE {
            if let Some(j) = neighbours(i).find(|&j| first_pass[j] != NONE) {
                agg[i] = first_pass[j];
            }
        }
    }
    // Pass 3: whatever remains forms new aggregates with its free neighbours.
    for i in 0..n {
        if agg[i] == NONE {
            agg[i] = count;
            for j in neighbours(i) {
                if agg[j] == NONE {
                    agg[j] = count;
                }
            }
            count += 1;
        }
    }
    (agg, count as usize)
}

/// `P = (I − ω D⁻¹ A) T` with `T` the normalised aggregate indicator.
fn smoothed_prolongator(a: &Csr, agg: &[u32], count: usize) -> Csr {
    let mut sizes = vec![0usize; count];
    for &g in agg {
        sizes[g as usize] += 1;
    }
    let t = Csr::from_triplets(
        a.rows,
        count,
        agg.iter()
            .enumerate()
            .map(|(i, &g)| (i as u32, g, 1.0 / (sizes[g as usize] as f64).sqrt()))
            .collect(),
    );
    let diag = a.diagonal();
    let inv: Vec<f64> = diag.iter().map(|&d| if d != 0.0 { 1.0 / d } else { 0.0 }).collect();
    let omega = 4.0 / (3.0 * spectral_radius(a, &inv));
    let mut s = a.clone();
    for i in 0..s.rows {
        let range = s.ptr[i]..s.ptr[i + 1];
        for p in range {
            let j = s.idx[p] as usize;
            let v = -omega * inv[i] * s.val[p];
            s.val[p] = if j == i { 1.0 + v } else { v };
        }
    }
    s.matmul(&t)
}

/// Power-iteration estimate of ρ(D⁻¹A), padded slightly upwards.
fn spectral_radius(a: &Csr, inv_diag: &[f64]) -> f64 {
    let n = a.rows;
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i as u64).wrapping_mul(2_654_435_761) % 1000) as f64 / 1000.0)
        .collect();
    let mut rho = 1.0;
    for _ in 0..20 {
        let mut y = a.mul(&x);
        for (yi, d) in y.iter_mut().zip(inv_diag) {
            *yi *= d;
        }
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if ny == 0.0 {
            return 1.0;
        }
        rho = ny / nx;
        x = y.into_iter().map(|v| v / ny).collect();
    }
    1.05 * rho
}

fn symmetrize(a: &Csr) -> Csr {
    let t = a.transpose();
    let mut s = a.clone();
    for i in 0..s.rows {
        for p in s.ptr[i]..s.ptr[i + 1] {
            s.val[p] = 0.5 * (s.val[p] + t.get(i, s.idx[p] as usize));
        }
    }
    s
}

fn pseudo_inverse(a: &Csr) -> DMatrix<f64> {
    let dense = a.to_dense();
    let eig = SymmetricEigen::new(dense);
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut inv = DMatrix::zeros(a.rows, a.rows);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() > PINV_CUTOFF * max {
            let v = eig.eigenvectors.column(k);
            inv += (v * v.transpose()) / lam;
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Shifted 3-D grid Laplacian on an `m³` block.
    fn grid(m: usize, shift: f64) -> Csr {
        let id = |x: usize, y: usize, z: usize| (x * m + y) * m + z;
        let mut t = Vec::new();
        for x in 0..m {
            for y in 0..m {
                for z in 0..m {
                    let i = id(x, y, z) as u32;
                    let mut deg = 0.0;
                    let mut link = |j: usize| {
                        t.push((i, j as u32, -1.0));
                        deg += 1.0;
                    };
                    if x > 0 { link(id(x - 1, y, z)); }
                    if x + 1 < m { link(id(x + 1, y, z)); }
                    if y > 0 { link(id(x, y - 1, z)); }
                    if y + 1 < m { link(id(x, y + 1, z)); }
                    if z > 0 { link(id(x, y, z - 1)); }
                    if z + 1 < m { link(id(x, y, z + 1)); }
                    t.push((i, i, deg + shift));
                }
            }
        }
        Csr::from_triplets(m * m * m, m * m * m, t)
    }

    #[test]
    fn aggregates_cover_every_row() {
        let a = grid(6, 0.0);
        let (agg, count) = aggregate(&a);
        assert!(agg.iter().all(|&g| (g as usize) < count));
        assert!(count < a.rows / 3);
    }

    #[test]
    fn prolongator_preserves_constants_away_from_smoothing() {
        let a = grid(8, 0.0);
        let (agg, count) = aggregate(&a);
        let p = smoothed_prolongator(&a, &agg, count);
        // A·1 = 0, so smoothing leaves T's interpolation of constants unchanged.
        let mut sizes = vec![0.0; count];
        for &g in &agg {
            sizes[g as usize] += 1.0;
        }
        let coarse: Vec<f64> = sizes.iter().map(|s: &f64| s.sqrt()).collect();
        for v in p.mul(&coarse) {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn v_cycle_converges_as_a_stationary_iteration() {
        let a = grid(14, 1e-3);
        let amg = Amg::new(a.clone());
        assert!(amg.level_sizes().len() >= 2);
        let b: Vec<f64> = (0..a.rows).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let mut x = vec![0.0; a.rows];
        let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
        let r0 = norm(&b);
        for _ in 0..12 {
            let ax = a.mul(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            for (xi, ci) in x.iter_mut().zip(amg.apply(&r)) {
                *xi += ci;
            }
        }
        let ax = a.mul(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        assert!(norm(&r) < 1e-6 * r0, "residual {}", norm(&r) / r0);
    }
}
