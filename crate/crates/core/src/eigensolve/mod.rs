//! Smallest nonzero eigenpairs of `S x = λ M x` with the kernel removed by
//! construction: one constant mode per connected component.

mod amg;
mod dense;
mod lobpcg;
mod problem;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{invalid_arg, Error, Result};
use crate::operators::ScaledOperatorPair;
use crate::timing::Stopwatch;

use problem::Problem;

pub const DEFAULT_TOL: f64 = 1e-8;
/// Largest dimension accepted by [`dense_reference`].
pub const DENSE_LIMIT: usize = 2000;
/// Extra block columns beyond the wanted `k`.
pub const GUARD_COLUMNS: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumMeta {
    /// Pipeline that produced the operator, filled in by the caller.
    pub algorithm: String,
    pub solver: String,
    pub r: Option<f64>,
    pub n: Option<u32>,
    pub k: usize,
    pub shape: Option<String>,
    pub dim: usize,
    pub kernel_dim: usize,
    pub iterations: usize,
    pub tol: f64,
    pub wall_seconds: f64,
    pub cpu_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    /// Reported eigenvalues (`sign · scale · λ`), sorted by magnitude.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues of the unscaled matrix pencil.
    pub matrix_eigenvalues: Vec<f64>,
    /// `M`-orthonormal eigenvectors, first significant entry positive.
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    /// `‖Sx − λMx‖ / (|λ| ‖Mx‖)` per pair, checked directly.
    pub residuals: Vec<f64>,
    pub meta: SpectrumMeta,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenGroup {
    pub value: f64,
    pub multiplicity: usize,
    pub first: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub seed: u64,
    pub keep_vectors: bool,
    /// Iteration cap; defaults to `300·k`.
    pub max_iterations: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            seed: 0x5eed,
            keep_vectors: true,
            max_iterations: None,
        }
    }
}

fn validate(pair: &ScaledOperatorPair, k: usize, tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(invalid_arg(format!("tol must lie in (0, 1e-4], got {tol}")));
    }
    if k == 0 {
        return Err(invalid_arg("k must be at least 1"));
    }
    let available = pair.dim() - pair.component_count;
    if k > available {
        return Err(invalid_arg(format!(
            "k = {k} requested but only {available} nonzero eigenvalues exist \
             ({} unknowns, {} components)",
            pair.dim(),
            pair.component_count
        )));
    }
    if pair.components.len() != pair.dim() {
        return Err(invalid_arg("component labels do not match the operator size"));
    }
    if pair.mass_diagonal().iter().any(|&m| !(m > 0.0)) {
        return Err(invalid_arg("mass matrix must be positive on the diagonal"));
    }
    Ok(())
}

pub fn smallest_nonzero(pair: &ScaledOperatorPair, k: usize, tol: f64) -> Result<SpectrumResult> {
    smallest_nonzero_with(
        pair,
        k,
        &SolveOptions {
            tol,
            ..SolveOptions::default()
        },
    )
}

/// The `k` nonzero eigenpairs of smallest magnitude.
///
/// Uses LOBPCG preconditioned by smoothed-aggregation multigrid, falling back to
/// a dense solve when the deflated space is barely larger than the block.
pub fn smallest_nonzero_with(
    pair: &ScaledOperatorPair,
    k: usize,
    opts: &SolveOptions,
) -> Result<SpectrumResult> {
    validate(pair, k, opts.tol)?;
    let clock = Stopwatch::start();
    let prob = Problem::new(pair);
    let block = k + GUARD_COLUMNS;
    let available = pair.dim() - pair.component_count;
    let (values, vectors, iterations, solver) = if available < 4 * block {
        let (v, y) = dense::dense_eigenpairs(&prob, k)?;
        (v, y, 0, "dense")
    } else {
        let s = lobpcg::Solver::new(&prob);
        log::debug!(
            "amg levels {:?}, operator complexity {:.2}",
            s.amg().level_sizes(),
            s.amg().operator_complexity()
        );
        let cap = opts.max_iterations.unwrap_or(300 * k);
        let out = s.solve(k, opts.tol, opts.seed, cap)?;
        (out.values, out.vectors, out.iterations, "lobpcg-amg")
    };
    finish(pair, &prob, values, vectors, k, opts, iterations, solver, clock)
}

/// Full dense solve of the same problem; the test oracle for [`smallest_nonzero`].
pub fn dense_reference(pair: &ScaledOperatorPair, k: usize) -> Result<SpectrumResult> {
    if pair.dim() > DENSE_LIMIT {
        return Err(invalid_arg(format!(
            "dense reference limited to {DENSE_LIMIT} unknowns, got {}",
            pair.dim()
        )));
    }
    let available = pair.dim() - pair.component_count;
    if k > available {
        return Err(invalid_arg(format!(
            "k = {k} requested but only {available} nonzero eigenvalues exist"
        )));
    }
    let clock = Stopwatch::start();
    let prob = Problem::new(pair);
    let (values, vectors) = dense::dense_eigenpairs(&prob, k)?;
    let opts = SolveOptions {
        tol: 1e-4,
        ..SolveOptions::default()
    };
    finish(pair, &prob, values, vectors, k, &opts, 0, "dense", clock)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    pair: &ScaledOperatorPair,
    prob: &Problem,
    values: Vec<f64>,
    y: DMatrix<f64>,
    k: usize,
    opts: &SolveOptions,
    iterations: usize,
    solver: &str,
    clock: Stopwatch,
) -> Result<SpectrumResult> {
    let dim = pair.dim();
    let mass = pair.mass_diagonal();
    let mut pairs: Vec<(f64, Vec<f64>, f64)> = Vec::with_capacity(values.len());
    for (j, _) in values.iter().enumerate() {
        let mut x: Vec<f64> = y
            .column(j)
            .iter()
            .zip(&prob.inv_sqrt_m)
            .map(|(a, d)| a * d)
            .collect();
        let mnorm = x.iter().zip(&mass).map(|(v, m)| v * v * m).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= mnorm);
        let sx = prob.s.mul(&x);
        let lambda: f64 = sx.iter().zip(&x).map(|(a, b)| a * b).sum();
        let res_sq: f64 = sx
            .iter()
            .zip(&x)
            .zip(&mass)
            .map(|((s, v), m)| (s - lambda * m * v).powi(2))
            .sum();
        let mx_norm = x.iter().zip(&mass).map(|(v, m)| (m * v).powi(2)).sum::<f64>().sqrt();
        let residual = res_sq.sqrt() / (lambda.abs() * mx_norm);
        let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if let Some(first) = x.iter().find(|v| v.abs() > 1e-10 * scale) {
            if *first < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
        }
        pairs.push((lambda, x, residual));
    }
    pairs.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    let residuals: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    let worst = residuals.iter().fold(0.0f64, |a, &v| a.max(v));
    if !(worst <= opts.tol) {
        return Err(Error::Convergence {
            iterations,
            worst,
            residuals,
        });
    }
    let matrix_eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    Ok(SpectrumResult {
        eigenvalues: matrix_eigenvalues.iter().map(|&l| pair.report(l)).collect(),
        matrix_eigenvalues,
        eigenvectors: opts
            .keep_vectors
            .then(|| pairs.into_iter().map(|p| p.1).collect()),
        residuals,
        meta: SpectrumMeta {
            algorithm: String::new(),
            solver: solver.to_string(),
            r: None,
            n: None,
            k,
            shape: None,
            dim,
            kernel_dim: prob.kernel_dim,
            iterations,
            tol: opts.tol,
            wall_seconds: clock.wall_seconds(),
            cpu_seconds: clock.cpu_seconds(),
        },
    })
}

/// Greedy grouping of consecutive values: a group grows while
/// `|v| − |v₀| ≤ reltol·|v₀|` for its first member `v₀`.
pub fn group_values(values: &[f64], reltol: f64) -> Vec<EigenGroup> {
    let mut groups: Vec<EigenGroup> = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let v0 = values[start].abs();
        if i == values.len() || values[i].abs() - v0 > reltol * v0 {
            let members = &values[start..i];
            groups.push(EigenGroup {
                value: members.iter().sum::<f64>() / members.len() as f64,
                multiplicity: members.len(),
                first: start,
            });
            start = i;
        }
    }
    if values.is_empty() {
        groups.clear();
    }
    groups
}

pub fn eigengroups(result: &SpectrumResult, reltol: f64) -> Vec<EigenGroup> {
    group_values(&result.eigenvalues, reltol)
}
