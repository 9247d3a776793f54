//! Reference spectra of the unit sphere and of the closed cone.

mod bessel;
mod dd;

pub use bessel::{bessel_j, bessel_j_prime, gamma, MAX_ARG, MAX_ORDER};

use bessel::{j_prime_unchecked, j_unchecked};

use crate::error::{invalid_arg, Error, Result};

/// Scan step in E for the cone root search.
pub const CONE_SCAN_STEP: f64 = 0.01;
/// Final bracket width of each bisected root.
pub const CONE_ROOT_WIDTH: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct AnalyticEntry {
    /// Eigenvalue of the Laplacian, `≤ 0`.
    pub eigenvalue: f64,
    pub multiplicity: u32,
    /// Degree ℓ for the sphere, Bessel index n for the cone.
    pub label: u32,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct AnalyticSpectrum {
    pub entries: Vec<AnalyticEntry>,
    /// Largest |eigenvalue| considered.
    pub cutoff: f64,
}

impl AnalyticSpectrum {
    /// Eigenvalues repeated by multiplicity.
    pub fn values(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat(e.eigenvalue).take(e.multiplicity as usize))
            .collect()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity as usize).sum()
    }
}

/// `ℓ(ℓ+1)` in integer arithmetic.
pub fn sphere_eigenvalue_magnitude(l: u64) -> u64 {
    l * (l + 1)
}

/// The first `k` nonzero eigenvalues of the unit sphere with multiplicity.
/// The last degree is truncated so that the multiplicities sum to `k`.
pub fn sphere_spectrum(k: usize) -> Result<AnalyticSpectrum> {
    if k == 0 {
        return Err(invalid_arg("k must be at least 1"));
    }
    let mut entries = Vec::new();
    let mut remaining = k as u64;
    let mut l = 0;
    while remaining > 0 {
        l += 1;
        let take = (2 * l + 1).min(remaining);
        entries.push(AnalyticEntry {
            eigenvalue: -(sphere_eigenvalue_magnitude(l) as f64),
            multiplicity: take as u32,
            label: l as u32,
        });
        remaining -= take;
    }
    Ok(AnalyticSpectrum {
        entries,
        cutoff: sphere_eigenvalue_magnitude(l) as f64,
    })
}

/// Cone `(t cos θ, t sin θ, h t)`, `0 ≤ t ≤ 1`, closed by the unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeParams {
    pub h: f64,
}

impl ConeParams {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid_arg(format!("cone slope h must be positive, got {h}")));
        }
        Ok(Self { h })
    }

    /// Bessel order of the lateral solution for angular index `n`.
    pub fn lateral_order(&self, n: u32) -> f64 {
        n as f64 * (1.0 + self.h * self.h).sqrt()
    }
}

impl Default for ConeParams {
    fn default() -> Self {
        Self { h: 1.0 }
    }
}

/// Matching condition between the lateral and cap solutions:
/// `g(E) = J′_ν(a√E) J_n(√E) + J_ν(a√E) J′_n(√E)` with `a = √(1+h²)`, `ν = n a`.
pub fn cone_characteristic(n: u32, e: f64, params: ConeParams) -> Result<f64> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(invalid_arg(format!("E must be positive, got {e}")));
    }
    let nu = params.lateral_order(n);
    let side = ((1.0 + params.h * params.h) * e).sqrt();
    let top = e.sqrt();
    if nu > MAX_ORDER || n as f64 > MAX_ORDER || side > MAX_ARG {
        return Err(invalid_arg(format!(
            "cone characteristic n={n}, E={e} exceeds the Bessel range"
        )));
    }
    Ok(characteristic(n as f64, nu, side, top))
}

fn characteristic(n: f64, nu: f64, side: f64, top: f64) -> f64 {
    j_prime_unchecked(nu, side) * j_unchecked(n, top)
        + j_unchecked(nu, side) * j_prime_unchecked(n, top)
}

/// All roots `E ∈ (0, cutoff]` of the characteristic equation for one `n`.
pub fn cone_roots(n: u32, params: ConeParams, cutoff: f64) -> Result<Vec<f64>> {
    let g = |e: f64| cone_characteristic(n, e, params);
    let steps = (cutoff / CONE_SCAN_STEP).floor() as usize;
    let mut grid: Vec<f64> = (1..=steps).map(|i| i as f64 * CONE_SCAN_STEP).collect();
    if grid.last().map_or(true, |&l| l < cutoff) {
        grid.push(cutoff);
    }
    let values = grid.iter().map(|&e| g(e)).collect::<Result<Vec<f64>>>()?;
    let mut roots = Vec::new();
    for i in 0..grid.len() {
        if values[i] == 0.0 {
            roots.push(grid[i]);
        } else if i + 1 < grid.len() && values[i] * values[i + 1] < 0.0 {
            roots.push(bisect(&g, grid[i], grid[i + 1], values[i])?);
        }
    }
    audit(&g, &grid, &values, roots.len(), n)?;
    Ok(roots)
}

fn bisect(g: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut ga: f64) -> Result<f64> {
    while b - a > CONE_ROOT_WIDTH {
        let m = 0.5 * (a + b);
        let gm = g(m)?;
        if gm == 0.0 {
            return Ok(m);
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Re-samples every window around a discrete extremum of `g`; any sign change
/// found there means the coarse scan skipped a pair of roots.
fn audit(
    g: &impl Fn(f64) -> Result<f64>,
    grid: &[f64],
    values: &[f64],
    found: usize,
    n: u32,
) -> Result<()> {
    const REFINE: usize = 64;
    for i in 1..grid.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        let extremum = (b - a) * (c - b) <= 0.0;
        let same_sign = a * b > 0.0 && b * c > 0.0;
        // Only an extremum pointing towards zero can hide a crossing.
        if !(extremum && same_sign && (b.abs() <= a.abs() || b.abs() <= c.abs())) {
            continue;
        }
        let (lo, hi) = (grid[i - 1], grid[i + 1]);
        let mut prev = a;
        for s in 1..=2 * REFINE {
            let e = lo + (hi - lo) * s as f64 / (2 * REFINE) as f64;
            let v = g(e)?;
            if v * prev < 0.0 {
                return Err(Error::Internal(format!(
                    "cone root scan for n={n} missed roots near E={e:.6} ({found} found)"
                )));
            }
            prev = v;
        }
    }
    Ok(())
}

/// Eigenvalues `−E` of the cone for `n = 0..=n_max`, `E ≤ cutoff`, merged in
/// ascending `E` with multiplicity 1 for `n = 0` and 2 otherwise.
pub fn cone_spectrum(params: ConeParams, cutoff: f64, n_max: u32) -> Result<AnalyticSpectrum> {
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(invalid_arg("cutoff must be positive"));
    }
    let mut entries = Vec::new();
    for n in 0..=n_max {
        for e in cone_roots(n, params, cutoff)? {
            entries.push(AnalyticEntry {
                eigenvalue: -e,
                multiplicity: if n == 0 { 1 } else { 2 },
                label: n,
            });
        }
    }
    entries.sort_by(|a, b| b.eigenvalue.total_cmp(&a.eigenvalue).then(a.label.cmp(&b.label)));
    Ok(AnalyticSpectrum { entries, cutoff })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_ladder() {
        let s = sphere_spectrum(3).unwrap();
        assert_eq!(s.values(), vec![-2.0; 3]);
        let s = sphere_spectrum(10).unwrap();
        let got: Vec<(f64, u32)> = s.entries.iter().map(|e| (e.eigenvalue, e.multiplicity)).collect();
        assert_eq!(got, vec![(-2.0, 3), (-6.0, 5), (-12.0, 2)]);
        assert_eq!(s.total_multiplicity(), 10);
        assert!(sphere_spectrum(0).is_err());
    }

    #[test]
    fn characteristic_vanishes_at_tabulated_roots() {
        let p = ConeParams::default();
        assert!(cone_characteristic(0, 3.85927, p).unwrap().abs() <= 1e-4);
        assert!(cone_characteristic(1, 3.03793, p).unwrap().abs() <= 1e-4);
        assert!(cone_characteristic(0, 1e-12, p).unwrap().is_finite());
        assert!(cone_characteristic(0, 0.0, p).is_err());
    }

    #[test]
    fn order_zero_roots() {
        let roots = cone_roots(0, ConeParams::default(), 102.01).unwrap();
        let table = [3.85927, 10.3388, 20.4572, 34.3839, 50.7012, 71.6951, 94.8567];
        assert_eq!(roots.len(), table.len());
        for (r, t) in roots.iter().zip(table) {
            assert!((r - t).abs() < 5e-4, "{r} vs {t}");
        }
    }

    #[test]
    fn general_slope_is_accepted() {
        let s = cone_spectrum(ConeParams::new(2.0).unwrap(), 30.0, 3).unwrap();
        assert!(!s.entries.is_empty());
        assert!(ConeParams::new(0.0).is_err());
    }
}
