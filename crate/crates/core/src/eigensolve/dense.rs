//! Full dense eigendecomposition of the deflated standard form.

use faer::{Mat, Side};
use nalgebra::DMatrix;

use super::problem::Problem;
use crate::error::{Error, Result};

/// The `k` smallest eigenpairs of `C` on the complement of its kernel. The
/// kernel is lifted above the rest of the spectrum by adding `σ Z Zᵀ` and its
/// eigenvalues are then discarded by count.
pub(crate) fn dense_eigenpairs(prob: &Problem, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dim = prob.dim();
    let mut c = Mat::<f64>::zeros(dim, dim);
    for i in 0..dim {
        let (idx, val) = prob.s.row(i);
        for (&j, &v) in idx.iter().zip(val) {
            let j = j as usize;
            c[(i, j)] += v * prob.inv_sqrt_m[i] * prob.inv_sqrt_m[j];
        }
    }
    let gershgorin = (0..dim)
        .map(|i| (0..dim).map(|j| c[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let sigma = 2.0 * gershgorin + 1.0;
    for members in &prob.members {
        for &i in members {
            for &j in members {
                let (i, j) = (i as usize, j as usize);
                c[(i, j)] += sigma * prob.z[i] * prob.z[j];
            }
        }
    }
    let eig = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Internal(format!("dense eigendecomposition failed: {e:?}")))?;
    let (s, u) = (eig.S().column_vector(), eig.U());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    order.truncate(dim - prob.kernel_dim);
    order.truncate(k);
    let values = order.iter().map(|&i| s[i]).collect();
    let vectors = DMatrix::from_fn(dim, order.len(), |r, c| u[(r, order[c])]);
    Ok((values, vectors))
}
