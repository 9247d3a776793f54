//! Block preconditioned conjugate gradient (LOBPCG) for the smallest
//! eigenpairs of `C` on the complement of its kernel.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::amg::Amg;
use super::problem::Problem;
use crate::error::{Error, Result};

/// Tracked images are recomputed from scratch this often.
const REFRESH: usize = 10;
/// Columns whose norm falls below this fraction during orthogonalisation are
/// treated as linearly dependent and dropped.
const DROP: f64 = 1e-10;
/// Rows per task in tall-skinny products.
const ROW_CHUNK: usize = 8192;

pub(crate) struct Outcome {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub iterations: usize,
}

pub(crate) struct Solver<'p, 'a> {
    prob: &'p Problem<'a>,
    amg: Amg,
}

impl<'p, 'a> Solver<'p, 'a> {
    pub fn new(prob: &'p Problem<'a>) -> Self {
        // S + εM in the unknowns of S, regularising the singular blocks.
        let mut a = prob.s.clone();
        let trace: f64 = a.diagonal().iter().sum();
        let eps = 1e-10 * trace / prob.dim() as f64;
        for i in 0..a.rows {
            for p in a.ptr[i]..a.ptr[i + 1] {
                if a.idx[p] as usize == i {
                    a.val[p] += eps * prob.sqrt_m[i] * prob.sqrt_m[i];
                }
            }
        }
        Self {
            prob,
            amg: Amg::new(a),
        }
    }

    pub fn amg(&self) -> &Amg {
        &self.amg
    }

    fn apply_block(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        let n = v.nrows().max(1);
        let mut out = DMatrix::zeros(v.nrows(), v.ncols());
        v.as_slice()
            .par_chunks(n)
            .zip(out.as_mut_slice().par_chunks_mut(n))
            .for_each(|(src, dst)| self.prob.apply(src, dst));
        out
    }

    /// `T = M^{1/2} B M^{1/2}` with `B` one V-cycle, followed by deflation.
    fn precondition(&self, v: &mut DMatrix<f64>) {
        let n = v.nrows().max(1);
        let prob = self.prob;
        v.as_mut_slice().par_chunks_mut(n).for_each(|col| {
            let mut f: Vec<f64> = col.iter().zip(&prob.sqrt_m).map(|(a, s)| a * s).collect();
            for members in &prob.members {
                let mean = members.iter().map(|&i| f[i as usize]).sum::<f64>() / members.len() as f64;
                for &i in members {
                    f[i as usize] -= mean;
                }
            }
            let u = self.amg.apply(&f);
            for ((c, u), s) in col.iter_mut().zip(u).zip(&prob.sqrt_m) {
                *c = u * s;
            }
            prob.deflate(col);
        });
    }

    fn deflate_block(&self, v: &mut DMatrix<f64>) {
        let n = v.nrows();
        for col in v.as_mut_slice().chunks_mut(n.max(1)) {
            self.prob.deflate(col);
        }
    }

    pub fn solve(&self, k: usize, tol: f64, seed: u64, max_iter: usize) -> Result<Outcome> {
        let n = self.prob.dim();
        let b = k + 5;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = DMatrix::from_fn(n, b, |_, _| rng.gen_range(-0.5..0.5));
        self.precondition(&mut x);
        let mut x = orthonormalize(x, &[]);
        let mut ax = self.apply_block(&x);
        let (theta, coef) = rayleigh_ritz(&[&x], &[&ax], &gram(&[&x], &[&x]), b);
        x = &x * &coef;
        ax = &ax * &coef;
        let mut theta = theta;
        let mut p: Option<(DMatrix<f64>, DMatrix<f64>)> = None;
        let mut residuals = vec![f64::INFINITY; b];

        for it in 0..max_iter {
            if it > 0 && it % REFRESH == 0 {
                self.deflate_block(&mut x);
                ax = self.apply_block(&x);
            }
            let r = &ax - &x * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(theta.clone()));
            for j in 0..b {
                residuals[j] = self.prob.relative_residual(
                    r.column(j).as_slice(),
                    x.column(j).as_slice(),
                    theta[j],
                );
            }
            if residuals[..k].iter().all(|&v| v <= tol) {
                // Confirm with exact images before accepting.
                ax = self.apply_block(&x);
                let r = &ax - &x * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(theta.clone()));
                let exact: Vec<f64> = (0..k)
                    .map(|j| {
                        self.prob.relative_residual(
                            r.column(j).as_slice(),
                            x.column(j).as_slice(),
                            theta[j],
                        )
                    })
                    .collect();
                log::debug!("lobpcg: iteration {it}, exact residuals {exact:?}");
                if exact.iter().all(|&v| v <= tol) {
                    return Ok(Outcome {
                        values: theta[..k].to_vec(),
                        vectors: x.columns(0, k).into_owned(),
                        iterations: it,
                    });
                }
            }
            let active: Vec<usize> = (0..b).filter(|&j| residuals[j] > tol).collect();
            let mut w = DMatrix::from_fn(n, active.len(), |i, c| r[(i, active[c])]);
            self.precondition(&mut w);
            let mut against: Vec<&DMatrix<f64>> = vec![&x];
            if let Some((pp, _)) = &p {
                against.push(pp);
            }
            let w = orthonormalize(w, &against);
            let aw = self.apply_block(&w);
            let (basis, images): (Vec<&DMatrix<f64>>, Vec<&DMatrix<f64>>) = match &p {
                Some((pp, ap)) if w.ncols() > 0 => (vec![&x, &w, pp], vec![&ax, &aw, ap]),
                Some((pp, ap)) => (vec![&x, pp], vec![&ax, ap]),
                None => (vec![&x, &w], vec![&ax, &aw]),
            };
            let m: usize = basis.iter().map(|v| v.ncols()).sum();
            if m == b {
                break;
            }
            let gb = gram(&basis, &basis);
            let (new_theta, coef) = rayleigh_ritz(&basis, &images, &gb, b);
            let pcoef = p_coefficients(&coef, &gb, b);
            let x_new = combine(&basis, &coef);
            let ax_new = combine(&images, &coef);
            p = if pcoef.ncols() > 0 {
                Some((combine(&basis, &pcoef), combine(&images, &pcoef)))
            } else {
                None
            };
            x = x_new;
            ax = ax_new;
            theta = new_theta;
            if it % 10 == 0 {
                log::debug!(
                    "lobpcg: iteration {it}, active {}, worst wanted residual {:.3e}",
                    active.len(),
                    residuals[..k].iter().fold(0.0f64, |a, &v| a.max(v))
                );
            }
        }
        let worst = residuals[..k].iter().fold(0.0f64, |a, &v| a.max(v));
        Err(Error::Convergence {
            iterations: max_iter,
            worst,
            residuals: residuals[..k].to_vec(),
        })
    }
}

/// `aᵀ b` for tall `a` and `b` with the same row count, summed over row
/// chunks in a fixed order.
fn at_b(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p, q) = (a.nrows(), a.ncols(), b.ncols());
    if n == 0 || p == 0 || q == 0 {
        return DMatrix::zeros(p, q);
    }
    let (sa, sb) = (a.as_slice(), b.as_slice());
    let parts: Vec<Vec<f64>> = (0..n)
        .step_by(ROW_CHUNK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|r0| {
            let len = ROW_CHUNK.min(n - r0);
            let mut c = vec![0.0; p * q];
            // SAFETY: both operands are column-major with leading dimension `n`,
            // and the chunk `r0..r0 + len` lies inside every column.
            unsafe {
                matrixmultiply::dgemm(
                    p,
                    len,
                    q,
                    1.0,
                    sa[r0..].as_ptr(),
                    n as isize,
                    1,
                    sb[r0..].as_ptr(),
                    1,
                    n as isize,
                    0.0,
                    c.as_mut_ptr(),
                    1,
                    p as isize,
                );
            }
            c
        })
        .collect();
    let mut out = DMatrix::zeros(p, q);
    for part in parts {
        for (o, v) in out.as_mut_slice().iter_mut().zip(part) {
            *o += v;
        }
    }
    out
}

/// Block Gram matrix `[L₀ L₁ …]ᵀ [R₀ R₁ …]`.
fn gram(left: &[&DMatrix<f64>], right: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = left.iter().map(|v| v.ncols()).sum();
    let cols: usize = right.iter().map(|v| v.ncols()).sum();
    let mut g = DMatrix::zeros(rows, cols);
    let mut r0 = 0;
    for l in left {
        let mut c0 = 0;
        for r in right {
            if l.ncols() > 0 && r.ncols() > 0 {
                g.view_mut((r0, c0), (l.ncols(), r.ncols()))
                    .copy_from(&at_b(l, r));
            }
            c0 += r.ncols();
        }
        r0 += l.ncols();
    }
    g
}

/// `Σ_i blocks[i] · coef[rows of block i]`.
fn combine(blocks: &[&DMatrix<f64>], coef: &DMatrix<f64>) -> DMatrix<f64> {
    let n = blocks[0].nrows();
    let mut out = DMatrix::zeros(n, coef.ncols());
    let mut r0 = 0;
    for blk in blocks {
        let c = blk.ncols();
        if c > 0 {
            out.gemm(1.0, blk, &coef.rows(r0, c), 1.0);
        }
        r0 += c;
    }
    out
}

/// Solves the projected problem `(Vᵀ A V) c = θ (Vᵀ V) c`, with `gb = Vᵀ V`, and returns the `b`
/// smallest Ritz values with `Vᵀ V`-orthonormal coefficients.
fn rayleigh_ritz(
    basis: &[&DMatrix<f64>],
    images: &[&DMatrix<f64>],
    gb: &DMatrix<f64>,
    b: usize,
) -> (Vec<f64>, DMatrix<f64>) {
    let mut ga = gram(basis, images);
    ga = (&ga + ga.transpose()) * 0.5;
    let gb = (gb + gb.transpose()) * 0.5;
    let m = ga.nrows();
    // Whitening of the (nearly orthonormal) basis Gram matrix.
    let eig_b = SymmetricEigen::new(gb);
    let maxb = eig_b.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v));
    let keep: Vec<usize> = (0..m)
        .filter(|&i| eig_b.eigenvalues[i] > DROP * DROP * maxb)
        .collect();
    let whiten = DMatrix::from_fn(m, keep.len(), |r, c| {
        eig_b.eigenvectors[(r, keep[c])] / eig_b.eigenvalues[keep[c]].sqrt()
    });
    let reduced = whiten.tr_mul(&ga) * &whiten;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let eig = SymmetricEigen::new(reduced);
    let mut order: Vec<usize> = (0..keep.len()).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));
    order.truncate(b);
    let theta = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let u = DMatrix::from_fn(keep.len(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (theta, whiten * u)
}

/// Coefficients of the new search directions: the non-`X` part of the Ritz
/// coefficients, made orthogonal to the new `X` and orthonormal, all in the
/// metric of the basis Gram matrix.
fn p_coefficients(coef: &DMatrix<f64>, gram: &DMatrix<f64>, b: usize) -> DMatrix<f64> {
    let mut q = coef.clone();
    q.rows_mut(0, b).fill(0.0);
    for _ in 0..2 {
        let proj = coef.tr_mul(&(gram * &q));
        q -= coef * proj;
    }
    let gq = q.tr_mul(&(gram * &q));
    let gq = (&gq + gq.transpose()) * 0.5;
    let eig = SymmetricEigen::new(gq);
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v));
    let keep: Vec<usize> = (0..q.ncols())
        .filter(|&i| max > 0.0 && eig.eigenvalues[i] > DROP * DROP * max)
        .collect();
    let t = DMatrix::from_fn(q.ncols(), keep.len(), |r, c| {
        eig.eigenvectors[(r, keep[c])] / eig.eigenvalues[keep[c]].sqrt()
    });
    q * t
}

/// Orthonormalises `v` against the orthonormal blocks `against` (classical
/// Gram–Schmidt, twice) and then within itself, dropping dependent columns.
fn orthonormalize(mut v: DMatrix<f64>, against: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let before: Vec<f64> = v.column_iter().map(|c| c.norm()).collect();
    for _ in 0..2 {
        for q in against {
            if q.ncols() > 0 && v.ncols() > 0 {
                let c = at_b(q, &v);
                v.gemm(-1.0, q, &c, 1.0);
            }
        }
    }
    let keep: Vec<usize> = (0..v.ncols())
        .filter(|&j| before[j] > 0.0 && v.column(j).norm() > DROP * before[j])
        .collect();
    let v = DMatrix::from_fn(v.nrows(), keep.len(), |r, c| v[(r, keep[c])]);
    svqb(svqb(v))
}

/// Orthonormalisation through the eigendecomposition of the scaled Gram matrix.
fn svqb(v: DMatrix<f64>) -> DMatrix<f64> {
    if v.ncols() == 0 {
        return v;
    }
    let g = at_b(&v, &v);
    let d: Vec<f64> = (0..g.nrows()).map(|i| 1.0 / g[(i, i)].sqrt()).collect();
    let scaled = DMatrix::from_fn(g.nrows(), g.ncols(), |i, j| d[i] * g[(i, j)] * d[j]);
    let eig = SymmetricEigen::new(scaled);
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x));
    let keep: Vec<usize> = (0..g.nrows())
        .filter(|&i| eig.eigenvalues[i] > DROP * DROP * max)
        .collect();
    let t = DMatrix::from_fn(g.nrows(), keep.len(), |r, c| {
        d[r] * eig.eigenvectors[(r, keep[c])] / eig.eigenvalues[keep[c]].sqrt()
    });
    v * t
}
