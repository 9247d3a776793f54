//! The symmetric standard form `C = M^{-1/2} S M^{-1/2}` with its structural kernel.

use crate::operators::ScaledOperatorPair;
use crate::sparse::Csr;

pub(crate) struct Problem<'a> {
    pub s: &'a Csr,
    pub sqrt_m: Vec<f64>,
    pub inv_sqrt_m: Vec<f64>,
    pub labels: &'a [u32],
    pub kernel_dim: usize,
    /// Unit kernel vectors `M^{1/2} 1_c / ‖M^{1/2} 1_c‖`, stored as one vector
    /// since their supports are disjoint.
    pub z: Vec<f64>,
    /// Indices of the members of each component.
    pub members: Vec<Vec<u32>>,
}

impl<'a> Problem<'a> {
    pub fn new(pair: &'a ScaledOperatorPair) -> Self {
        let m = pair.mass_diagonal();
        let sqrt_m: Vec<f64> = m.iter().map(|v| v.sqrt()).collect();
        let inv_sqrt_m = sqrt_m.iter().map(|v| 1.0 / v).collect();
        let mut norms = vec![0.0; pair.component_count];
        let mut members = vec![Vec::new(); pair.component_count];
        for (i, &c) in pair.components.iter().enumerate() {
            norms[c as usize] += m[i];
            members[c as usize].push(i as u32);
        }
        let z = pair
            .components
            .iter()
            .zip(&sqrt_m)
            .map(|(&c, s)| s / norms[c as usize].sqrt())
            .collect();
        Self {
            s: pair.stiffness.csr(),
            sqrt_m,
            inv_sqrt_m,
            labels: &pair.components,
            kernel_dim: pair.component_count,
            z,
            members,
        }
    }

    pub fn dim(&self) -> usize {
        self.s.rows
    }

    /// `out = C y`.
    pub fn apply(&self, y: &[f64], out: &mut [f64]) {
        let x: Vec<f64> = y.iter().zip(&self.inv_sqrt_m).map(|(a, b)| a * b).collect();
        self.s.mul_into(&x, out);
        for (o, d) in out.iter_mut().zip(&self.inv_sqrt_m) {
            *o *= d;
        }
    }

    /// Removes the kernel component of `y`.
    pub fn deflate(&self, y: &mut [f64]) {
        let mut coef = vec![0.0; self.kernel_dim];
        for ((&c, &z), &v) in self.labels.iter().zip(&self.z).zip(y.iter()) {
            coef[c as usize] += z * v;
        }
        for ((&c, &z), v) in self.labels.iter().zip(&self.z).zip(y.iter_mut()) {
            *v -= coef[c as usize] * z;
        }
    }

    /// Relative residual `‖Sx − λMx‖ / (|λ| ‖Mx‖)` of `x = M^{-1/2} y`, given
    /// `r = C y − λ y`.
    pub fn relative_residual(&self, r: &[f64], y: &[f64], lambda: f64) -> f64 {
        let weighted = |v: &[f64]| {
            v.iter()
                .zip(&self.sqrt_m)
                .map(|(a, s)| (a * s) * (a * s))
                .sum::<f64>()
                .sqrt()
        };
        weighted(r) / (lambda.abs() * weighted(y))
    }
}
